"""Finite-group unitary representations, the group projector and the twirl."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import NotGroup, NotInvolution, NotUnitary, ProjectivePhase, ShapeError
from .numerics import _check_square, as_operator, dagger, tol_unitary

TOL_PHASE = 1e-9


@dataclass(frozen=True, eq=False)
class GroupRep:
    """True unitary representation of a finite group given by its multiplication table.

    Build through :func:`validate_rep` (or the constructors below) so that the
    invariants are checked.
    """

    elements: tuple
    mult_table: np.ndarray

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    @cached_property
    def stacked(self) -> np.ndarray:
        return np.stack(self.elements)

    @cached_property
    def inverse_index(self) -> np.ndarray:
        return np.argmax(self.mult_table == 0, axis=1)

    def __len__(self):
        return self.order

    def __iter__(self):
        return iter(self.elements)

    def to_json(self) -> dict:
        from .circuits import matrix_to_json
        return {"order": self.order, "elements": [matrix_to_json(u) for u in self.elements],
                "mult_table": self.mult_table.tolist()}


def _check_table(table: np.ndarray, n: int) -> np.ndarray:
    table = np.asarray(table)
    if table.shape != (n, n) or not np.issubdtype(table.dtype, np.integer):
        raise NotGroup(f"multiplication table must be an integer {n}x{n} array")
    if table.min() < 0 or table.max() >= n:
        raise NotGroup("multiplication table entries out of range")
    ident = np.arange(n)
    if not (np.array_equal(table[0], ident) and np.array_equal(table[:, 0], ident)):
        raise NotGroup("element 0 is not the identity of the table")
    for k in range(n):
        if len(set(table[k])) != n or len(set(table[:, k])) != n:
            raise NotGroup("table is not a Latin square (inverses not unique)")
    # (gh)k == g(hk) for all triples
    left = table[table, :]  # left[g, h, k] = (gh)k
    right = table[:, table]  # right[g, h, k] = g(hk)
    if not np.array_equal(left, right):
        raise NotGroup("multiplication table is not associative")
    return table


def validate_rep(elements: Sequence, mult_table) -> GroupRep:
    """Check that ``elements`` form a true unitary representation of ``mult_table``."""
    mats = [np.array(_check_square(u, "group element"), dtype=complex) for u in elements]
    if not mats:
        raise NotGroup("a group needs at least the identity")
    d = mats[0].shape[0]
    if any(m.shape != (d, d) for m in mats):
        raise ShapeError("group elements have different dimensions")
    tol = tol_unitary(d)
    eye = np.eye(d)
    for i, u in enumerate(mats):
        if np.linalg.norm(dagger(u) @ u - eye) > tol:
            raise NotUnitary(f"group element {i} is not unitary")
    if np.linalg.norm(mats[0] - eye) > tol:
        raise NotGroup("element 0 is not the identity matrix")
    table = _check_table(np.array(mult_table, dtype=np.int64), len(mats))
    for g, ug in enumerate(mats):
        for h, uh in enumerate(mats):
            prod = ug @ uh
            target = mats[table[g, h]]
            if np.linalg.norm(prod - target) <= tol:
                continue
            # ratio test: prod = e^{i phi} target for a projective rep
            overlap = np.trace(dagger(target) @ prod) / d
            if abs(abs(overlap) - 1) < 1e-6 and np.linalg.norm(prod - overlap * target) <= 1e-6 * d:
                raise ProjectivePhase(
                    f"U({g})U({h}) = e^(i{np.angle(overlap):.6g}) U({table[g, h]}): projective representation")
            raise NotGroup(f"U({g})U({h}) does not match U({table[g, h]}) from the table")
    for m in mats:
        m.setflags(write=False)
    table.setflags(write=False)
    return GroupRep(tuple(mats), table)


def projector(rep: GroupRep) -> np.ndarray:
    """Group projector (1/|G|) sum_g U(g)."""
    p = rep.stacked.mean(axis=0)
    return (p + dagger(p)) / 2


def twirl(rep: GroupRep, rho) -> np.ndarray:
    """(1/|G|) sum_g U(g) rho U(g)^dagger."""
    r = as_operator(rho)
    if r.shape[0] != rep.dim:
        raise ShapeError(f"state dimension {r.shape[0]} does not match representation dimension {rep.dim}")
    u = rep.stacked
    out = np.einsum("gij,jk,glk->il", u, r, u.conj()) / rep.order
    return (out + dagger(out)) / 2


def trivial_rep(d: int) -> GroupRep:
    return validate_rep([np.eye(d, dtype=complex)], [[0]])


def shift_operator(d: int, x: int = 1) -> np.ndarray:
    """Heisenberg-Weyl shift X(x)|j> = |j + x mod d>."""
    return np.roll(np.eye(d, dtype=complex), x % d, axis=0)


def cyclic_table(n: int) -> np.ndarray:
    i = np.arange(n)
    return (i[:, None] + i[None, :]) % n


def shift_rep(d: int) -> GroupRep:
    """Cyclic group Z_d acting on C^d through the shift operators."""
    if d < 2:
        raise ShapeError("shift_rep needs d >= 2")
    return validate_rep([shift_operator(d, x) for x in range(d)], cyclic_table(d))


def c2_from_unitary(v: np.ndarray) -> GroupRep:
    """Two-element group {I, v} for an involutive unitary v."""
    v = _check_square(v, "involution")
    d = v.shape[0]
    if np.linalg.norm(v @ v - np.eye(d)) > tol_unitary(d):
        raise NotInvolution("v^2 != I")
    return validate_rep([np.eye(d, dtype=complex), v], [[0, 1], [1, 0]])


def swap_rep(d: int) -> GroupRep:
    """{I, SWAP} acting on C^d ⊗ C^d."""
    from .numerics import permutation_matrix
    return c2_from_unitary(permutation_matrix([d, d], [1, 0]))


def rep_from_json(data: dict) -> GroupRep:
    from .circuits import circuit_from_json, compile_circuit, matrix_from_json
    elems = []
    for e in data["elements"]:
        if isinstance(e, dict):
            if "circuit" in e:
                elems.append(compile_circuit(circuit_from_json(e["circuit"])))
            else:
                elems.append(matrix_from_json(e["matrix"]))
        else:
            elems.append(matrix_from_json(e))
    if "order" in data and int(data["order"]) != len(elems):
        raise NotGroup(f"declared order {data['order']} but {len(elems)} elements given")
    return validate_rep(elems, data["mult_table"])
