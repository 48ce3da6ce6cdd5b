"""Gate-level circuit IR and exact compilation to unitaries.

Wires are laid out in register-declaration order and wire 0 is the most
significant tensor factor. A qubit register ``S`` with ``k`` qubits owns
wires ``S.0 ... S.{k-1}``; a qudit register ``C`` of dimension ``d`` owns a
single wire named ``C``. Named gates (H, X, CX, ...) act on qubit wires only;
``QFT`` acts on one wire of any dimension and ``RAW`` on any wires.

Gates in a circuit are listed in application order, so
``compile(c1 + c2) == compile(c2) @ compile(c1)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence, Union

import numpy as np

from .errors import BadCircuit, BadIndex, BadWire, DimensionCap, NotUnitary
from .numerics import DIM_CAP, PureState, dagger, tol_unitary

Wire = Union[int, str]

_SQ2 = 1 / np.sqrt(2)
FIXED_GATES = {
    "H": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "T": np.array([[1, 0], [0, np.exp(1j * np.pi / 4)]], dtype=complex),
    "CX": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
    "SWAP": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
}
_ARITY = {"H": 1, "X": 1, "Y": 1, "Z": 1, "S": 1, "T": 1, "CX": 2, "CZ": 2, "SWAP": 2}
KINDS = tuple(FIXED_GATES) + ("QFT", "RAW", "CONTROLLED", "ADJOINT")


def qft_matrix(d: int) -> np.ndarray:
    j = np.arange(d)
    return np.exp(2j * np.pi * np.outer(j, j) / d) / np.sqrt(d)


@dataclass(frozen=True, eq=False)
class Gate:
    """One gate. ``wires`` are the wires the local matrix acts on, in order.

    For ``CONTROLLED`` the wires are ``controls + inner.wires`` and the inner
    gate fires when every control qubit is ``|1>``. ``ADJOINT`` reuses the
    inner gate's wires.
    """

    kind: str
    wires: tuple
    matrix: np.ndarray | None = None
    inner: Gate | None = None
    controls: tuple = ()

    def __post_init__(self):
        kind = self.kind.upper()
        if kind not in KINDS:
            raise BadCircuit(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "wires", tuple(self.wires))
        object.__setattr__(self, "controls", tuple(self.controls))
        if kind in _ARITY and len(self.wires) != _ARITY[kind]:
            raise BadCircuit(f"{kind} acts on {_ARITY[kind]} wires, got {len(self.wires)}")
        if kind == "QFT" and len(self.wires) != 1:
            raise BadCircuit("QFT acts on exactly one wire")
        if kind == "RAW":
            m = np.array(self.matrix, dtype=complex)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise BadCircuit("RAW gate needs a square matrix")
            if np.linalg.norm(dagger(m) @ m - np.eye(m.shape[0])) > tol_unitary(m.shape[0]):
                raise NotUnitary("RAW gate payload is not unitary")
            m.setflags(write=False)
            object.__setattr__(self, "matrix", m)
        if kind in ("CONTROLLED", "ADJOINT") and self.inner is None:
            raise BadCircuit(f"{kind} gate needs an inner gate")
        if len(set(self.wires)) != len(self.wires):
            raise BadCircuit(f"gate {kind} uses a wire twice: {self.wires}")

    def local_matrix(self, wire_dims: Sequence[int]) -> np.ndarray:
        """Matrix on ``self.wires`` given the dimension of each of those wires."""
        if self.kind in FIXED_GATES:
            if any(d != 2 for d in wire_dims):
                raise BadWire(f"{self.kind} acts on qubit wires only")
            return FIXED_GATES[self.kind]
        if self.kind == "QFT":
            return qft_matrix(wire_dims[0])
        if self.kind == "RAW":
            if self.matrix.shape[0] != int(np.prod(wire_dims)):
                raise BadWire(
                    f"RAW matrix of size {self.matrix.shape[0]} does not fit wires of dims {list(wire_dims)}")
            return self.matrix
        if self.kind == "ADJOINT":
            return dagger(self.inner.local_matrix(wire_dims))
        nc = len(self.controls)
        if any(d != 2 for d in wire_dims[:nc]):
            raise BadWire("control wires must be qubits")
        inner = self.inner.local_matrix(wire_dims[nc:])
        d_in = inner.shape[0]
        m = np.eye(2 ** nc * d_in, dtype=complex)
        m[-d_in:, -d_in:] = inner
        return m

    def adjoint(self) -> Gate:
        if self.kind == "ADJOINT":
            return self.inner
        if self.kind in ("H", "X", "Y", "Z", "CX", "CZ", "SWAP"):
            return self
        return Gate("ADJOINT", self.wires, inner=self)

    def remap(self, mapping) -> Gate:
        """Same gate with every wire reference passed through ``mapping``."""
        inner = self.inner.remap(mapping) if self.inner is not None else None
        return replace(self, wires=tuple(mapping(w) for w in self.wires),
                       controls=tuple(mapping(w) for w in self.controls), inner=inner)


def gate(kind: str, *wires: Wire) -> Gate:
    return Gate(kind, wires)


def raw(matrix: np.ndarray, *wires: Wire) -> Gate:
    return Gate("RAW", wires, matrix=np.asarray(matrix, dtype=complex))


def qft(wire: Wire) -> Gate:
    return Gate("QFT", (wire,))


def controlled(inner: Gate, *controls: Wire) -> Gate:
    return Gate("CONTROLLED", tuple(controls) + inner.wires, inner=inner, controls=tuple(controls))


def adjoint(inner: Gate) -> Gate:
    return inner.adjoint()


@dataclass(frozen=True)
class Register:
    name: str
    qubits: int | None = None
    dim: int | None = None

    def __post_init__(self):
        if (self.qubits is None) == (self.dim is None):
            raise BadCircuit(f"register {self.name!r} needs exactly one of qubits/dim")
        if self.qubits is not None and self.qubits < 0:
            raise BadCircuit("negative qubit count")
        if self.dim is not None and self.dim < 1:
            raise BadCircuit("qudit dimension must be positive")

    def wire_names(self) -> list[str]:
        if self.qubits is not None:
            return [f"{self.name}.{i}" for i in range(self.qubits)]
        return [self.name]

    def wire_dims(self) -> list[int]:
        return [2] * self.qubits if self.qubits is not None else [self.dim]

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.wire_dims()))


@dataclass(frozen=True, eq=False)
class GateCircuit:
    """Immutable ordered gate list over named registers."""

    registers: tuple[Register, ...]
    gates: tuple[Gate, ...] = field(default_factory=tuple)

    def __post_init__(self):
        regs = tuple(r if isinstance(r, Register) else Register(*r) for r in self.registers)
        names = [r.name for r in regs]
        if len(set(names)) != len(names):
            raise BadCircuit("duplicate register names")
        object.__setattr__(self, "registers", regs)
        dims = self.wire_dims
        if int(np.prod(dims)) > DIM_CAP:
            raise DimensionCap(f"circuit dimension {int(np.prod(dims))} exceeds {DIM_CAP}")
        resolved = tuple(g.remap(self.wire_index) for g in self.gates)
        for g in resolved:
            g.local_matrix([dims[w] for w in g.wires])
        object.__setattr__(self, "gates", resolved)

    @property
    def wire_names(self) -> list[str]:
        return [n for r in self.registers for n in r.wire_names()]

    @property
    def wire_dims(self) -> list[int]:
        return [d for r in self.registers for d in r.wire_dims()]

    @property
    def dim(self) -> int:
        return int(np.prod(self.wire_dims))

    def wire_index(self, wire: Wire) -> int:
        names = self.wire_names
        if isinstance(wire, (int, np.integer)):
            if not 0 <= int(wire) < len(names):
                raise BadWire(f"wire index {wire} out of range")
            return int(wire)
        if wire in names:
            return names.index(wire)
        # a one-qubit register may be named without its ".0" suffix
        if any(r.name == wire and r.qubits == 1 for r in self.registers):
            return names.index(f"{wire}.0")
        raise BadWire(f"unknown wire {wire!r}")

    def register_wires(self, name: str) -> list[int]:
        start = 0
        for r in self.registers:
            n = len(r.wire_names())
            if r.name == name:
                return list(range(start, start + n))
            start += n
        raise BadWire(f"unknown register {name!r}")

    def register(self, name: str) -> Register:
        for r in self.registers:
            if r.name == name:
                return r
        raise BadWire(f"unknown register {name!r}")

    def then(self, *gates: Gate) -> GateCircuit:
        return GateCircuit(self.registers, self.gates + tuple(gates))

    def __add__(self, other: GateCircuit) -> GateCircuit:
        if [r for r in self.registers] != [r for r in other.registers]:
            raise BadCircuit("cannot concatenate circuits over different registers")
        return GateCircuit(self.registers, self.gates + other.gates)

    def extend(self, *registers: Register) -> GateCircuit:
        """Append fresh registers; existing gates are unchanged."""
        return GateCircuit(self.registers + tuple(registers), self.gates)

    def inverse(self) -> GateCircuit:
        return GateCircuit(self.registers, tuple(g.adjoint() for g in reversed(self.gates)))

    def to_json(self) -> dict:
        return circuit_to_json(self)


def _apply_local(tensor: np.ndarray, local: np.ndarray, wires: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    """Apply ``local`` to axes ``wires`` of ``tensor`` whose leading axes are the circuit wires."""
    k = len(wires)
    op = local.reshape([dims[w] for w in wires] * 2)
    out = np.tensordot(op, tensor, axes=(list(range(k, 2 * k)), list(wires)))
    # tensordot puts the acted-on axes first; move them back
    rest = [ax for ax in range(tensor.ndim) if ax not in wires]
    order = [0] * tensor.ndim
    for i, w in enumerate(wires):
        order[w] = i
    for j, ax in enumerate(rest):
        order[ax] = k + j
    return np.transpose(out, order)


def _run(c: GateCircuit, block: np.ndarray) -> np.ndarray:
    dims = c.wire_dims
    ncols = block.shape[1]
    t = block.reshape(dims + [ncols])
    for g in c.gates:
        t = _apply_local(t, g.local_matrix([dims[w] for w in g.wires]), g.wires, dims)
    return t.reshape(c.dim, ncols)


def compile_circuit(c: GateCircuit) -> np.ndarray:
    """Unitary implemented by the circuit (product of gate embeddings in order)."""
    return _run(c, np.eye(c.dim, dtype=complex))


def embed(local: np.ndarray, wires: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    """Full matrix of ``local`` acting on ``wires`` of a register with wire dims ``dims``."""
    d = int(np.prod(dims))
    t = np.eye(d, dtype=complex).reshape(list(dims) + [d])
    return _apply_local(t, np.asarray(local, dtype=complex), list(wires), list(dims)).reshape(d, d)


def run_state(c: GateCircuit, state: np.ndarray) -> np.ndarray:
    """Apply the circuit to a state vector without forming the unitary."""
    vec = np.asarray(state, dtype=complex).reshape(c.dim, 1)
    return _run(c, vec).reshape(-1)


def basis_index(c: GateCircuit, bits: str | int | Sequence[int]) -> int:
    if isinstance(bits, (int, np.integer)):
        return int(bits)
    digits = [int(b) for b in bits]
    dims = c.wire_dims
    if len(digits) != len(dims):
        raise BadIndex(f"expected {len(dims)} digits, got {len(digits)}")
    idx = 0
    for dgt, d in zip(digits, dims):
        if not 0 <= dgt < d:
            raise BadIndex(f"digit {dgt} out of range for wire of dim {d}")
        idx = idx * d + dgt
    return idx


def apply(c: GateCircuit, basis_input: str | int | Sequence[int]) -> PureState:
    """Output state for a computational-basis input (a column of the compiled unitary)."""
    idx = basis_index(c, basis_input)
    if not 0 <= idx < c.dim:
        raise BadIndex(f"basis index {idx} out of range for dimension {c.dim}")
    vec = np.zeros(c.dim, dtype=complex)
    vec[idx] = 1.0
    return PureState(run_state(c, vec), tuple(c.wire_dims))


def conjugate(c: GateCircuit, inner: Gate | Sequence[Gate]) -> GateCircuit:
    """Circuit for ``C^dagger . inner . C``: run c, then inner, then c undone gate by gate."""
    inner = [inner] if isinstance(inner, Gate) else list(inner)
    body = GateCircuit(c.registers, tuple(inner))
    return GateCircuit(c.registers, c.gates + body.gates + c.inverse().gates)


@dataclass(frozen=True, eq=False)
class Isometry:
    """Linear map with ``M^dagger M = I``; columns index the input space."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] < m.shape[1]:
            raise BadCircuit(f"isometry needs out_dim >= in_dim, got shape {m.shape}")
        if np.linalg.norm(dagger(m) @ m - np.eye(m.shape[1])) > tol_unitary(m.shape[1]):
            raise NotUnitary("matrix is not an isometry")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def in_dim(self) -> int:
        return self.matrix.shape[1]

    @property
    def out_dim(self) -> int:
        return self.matrix.shape[0]


# --- JSON ---------------------------------------------------------------

def matrix_to_json(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def matrix_from_json(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 3 and arr.shape[2] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    if arr.ndim == 2:
        return arr.astype(complex)
    raise BadCircuit(f"cannot read matrix with array shape {arr.shape}")


def _gate_to_json(g: Gate, names: list[str]) -> dict:
    if g.kind == "CONTROLLED":
        return {"kind": "controlled", "controls": [names[w] for w in g.controls],
                "inner": _gate_to_json(g.inner, names)}
    if g.kind == "ADJOINT":
        return {"kind": "adjoint", "inner": _gate_to_json(g.inner, names)}
    if g.kind in ("CX", "CZ"):
        return {"kind": g.kind, "controls": [names[g.wires[0]]], "targets": [names[g.wires[1]]]}
    out = {"kind": "raw" if g.kind == "RAW" else g.kind, "targets": [names[w] for w in g.wires]}
    if g.kind == "RAW":
        out["matrix"] = matrix_to_json(g.matrix)
    return out


def _gate_from_json(d: dict) -> Gate:
    kind = str(d["kind"]).upper()
    if kind == "CONTROLLED":
        return controlled(_gate_from_json(d["inner"]), *d["controls"])
    if kind == "ADJOINT":
        return adjoint(_gate_from_json(d["inner"]))
    wires = list(d.get("controls", [])) + list(d.get("targets", []))
    if kind == "RAW":
        return raw(matrix_from_json(d["matrix"]), *wires)
    if kind in ("X", "Z") and d.get("controls"):
        if len(d["controls"]) != 1:
            return controlled(Gate(kind, tuple(d["targets"])), *d["controls"])
        kind = "C" + kind
    return Gate(kind, tuple(wires))


def circuit_to_json(c: GateCircuit) -> dict:
    regs = []
    for r in c.registers:
        regs.append({"name": r.name, "qubits": r.qubits} if r.qubits is not None else {"name": r.name, "dim": r.dim})
    names = c.wire_names
    return {"registers": regs, "gates": [_gate_to_json(g, names) for g in c.gates]}


def circuit_from_json(data: dict) -> GateCircuit:
    try:
        regs = tuple(Register(r["name"], qubits=r.get("qubits"), dim=r.get("dim")) for r in data["registers"])
        gates = tuple(_gate_from_json(g) for g in data.get("gates", []))
    except (KeyError, TypeError) as exc:
        raise BadCircuit(f"malformed circuit JSON: {exc}") from exc
    return GateCircuit(regs, gates)


def qubits(name: str, n: int) -> Register:
    return Register(name, qubits=n)


def qudit(name: str, d: int) -> Register:
    return Register(name, dim=d)


def raw_circuit(matrix: np.ndarray, registers: Sequence[Register]) -> GateCircuit:
    """Single RAW gate spanning every wire of ``registers``."""
    regs = tuple(registers)
    n = sum(len(r.wire_names()) for r in regs)
    return GateCircuit(regs, (raw(matrix, *range(n)),))
