"""Symmetry measures for states, channels and Hamiltonians.

Closed-form measures are exact. Optimization-backed measures solve a
semidefinite program and, where a prover-style search exists, also report
an independent see-saw lower bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .channels import EBChannel, QuantumChannel, adjoint_apply, apply, purify
from .errors import ShapeError
from .numerics import (
    _check_hermitian,
    as_operator,
    commutator,
    dagger,
    expm_hermitian,
    fidelity,
    hs_norm,
    spectral_norm,
    trace_distance,
)
from .optimize.sdp import SDPProblem, hermitian_basis, sdp_solve
from .optimize.seesaw import eb_seesaw, seesaw_prover
from .symmetry import GroupRep, projector, twirl

KINDS = (
    "bose_symmetry", "hs_asymmetry", "channel_bose_max", "twirl_td", "min_td_sym",
    "max_fid_sym", "twirl_fid", "bse_fidelity", "sep_ext_bose", "channel_bse",
    "ham_max_spec", "ham_avg_spec",
)

# eigenvalues below this fraction of the largest are treated as outside the support
SUPPORT_TOL = 1e-12


@dataclass
class MeasureResult:
    kind: str
    value: float
    lower: float | None = None
    upper: float | None = None
    gap: float = 0.0
    certificate: Any = None
    argmax_g: int | None = None
    iterations: int | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.lower is None:
            self.lower = self.value
        if self.upper is None:
            self.upper = self.value
        self.gap = max(0.0, float(self.gap))

    def __float__(self):
        return float(self.value)

    def to_json(self) -> dict:
        out = {"kind": self.kind, "value": float(self.value), "lower": float(self.lower),
               "upper": float(self.upper), "gap": float(self.gap),
               "argmax_g": self.argmax_g, "iterations": self.iterations}
        for k, v in self.extra.items():
            if isinstance(v, (int, float, str, bool)) or v is None:
                out[k] = v
        return out


def _state(rho, rep: GroupRep) -> np.ndarray:
    r = as_operator(rho)
    if r.shape[0] != rep.dim:
        raise ShapeError(f"state dimension {r.shape[0]} does not match representation dimension {rep.dim}")
    return r


def _support(m: np.ndarray) -> np.ndarray:
    """Isometry onto the support of a PSD matrix."""
    lam, vec = np.linalg.eigh((m + dagger(m)) / 2)
    keep = lam > SUPPORT_TOL * max(lam[-1], 1e-300)
    return vec[:, keep]


def _fixed_point_constraints(rep: GroupRep) -> np.ndarray:
    """Operators E - T(E) over a Hermitian basis; Tr[(E - T(E)) sigma] = 0 iff sigma = T(sigma)."""
    basis = hermitian_basis(rep.dim)
    u = rep.stacked
    tw = np.einsum("gij,kjl,gml->kim", u, basis, u.conj()) / rep.order
    diff = basis - tw
    keep = np.linalg.norm(diff, axis=(1, 2)) > 1e-12
    return diff[keep]


# --- closed-form state measures -----------------------------------------

def bose_symmetry(rho, rep: GroupRep) -> MeasureResult:
    """Tr[Pi rho]: probability of projecting onto the Bose-symmetric subspace."""
    r = _state(rho, rep)
    val = float(np.real(np.trace(projector(rep) @ r)))
    return MeasureResult("bose_symmetry", min(max(val, 0.0), 1.0))


def hs_asymmetry_direct(rho, rep: GroupRep) -> float:
    """(1/|G|) sum_g ||[U(g), rho]||_2^2."""
    r = _state(rho, rep)
    return float(sum(hs_norm(commutator(u, r)) ** 2 for u in rep.elements) / rep.order)


def hs_asymmetry(rho, rep: GroupRep) -> MeasureResult:
    """2(Tr[rho^2] - Tr[rho T(rho)]), cross-checked against the commutator form."""
    r = _state(rho, rep)
    purity = float(np.real(np.vdot(r, r)))
    overlap = float(np.real(np.vdot(r, twirl(rep, r))))
    val = 2 * (purity - overlap)
    direct = hs_asymmetry_direct(r, rep)
    return MeasureResult("hs_asymmetry", val, extra={"direct": direct, "route_diff": abs(val - direct)})


def gamma_bound(order: int) -> float:
    if order < 1:
        raise ValueError("group order must be at least 1")
    return 2 * (1 - 1 / order)


def twirl_td(rho, rep: GroupRep) -> float:
    r = _state(rho, rep)
    return trace_distance(r, twirl(rep, r))


def twirl_fid(rho, rep: GroupRep) -> float:
    r = _state(rho, rep)
    return fidelity(r, twirl(rep, r))


# --- channel measures -----------------------------------------------------

def channel_bose_max(ch: QuantumChannel, rep: GroupRep) -> MeasureResult:
    """max_rho Tr[Pi N(rho)] = lambda_max(N^dagger(Pi)); the certificate is the optimal pure input."""
    if rep.dim != ch.out_dim:
        raise ShapeError("representation dimension does not match channel output")
    eff = adjoint_apply(ch, projector(rep))
    lam, vec = np.linalg.eigh(eff)
    val = min(max(float(lam[-1]), 0.0), 1.0)
    return MeasureResult("channel_bose_max", val, certificate=vec[:, -1])


# --- SDP-backed state measures --------------------------------------------

def min_td_sym(rho, rep: GroupRep) -> MeasureResult:
    """min over twirl-invariant sigma of (1/2)||rho - sigma||_1, solved as an SDP.

    Blocks (P, sigma, L) with P + sigma - L = rho; minimizing Tr P gives the
    positive part of rho - sigma. ``lower``/``upper`` come from the dual and
    primal objectives; the certificate is the optimal sigma.
    """
    r = _state(rho, rep)
    d = rep.dim
    p = SDPProblem([d, d, d])
    p.set_objective(0, -np.eye(d))
    basis = hermitian_basis(d)
    p.add_constraints({0: basis, 1: basis, 2: -basis}, [np.real(np.vdot(e, r)) for e in basis])
    fp = _fixed_point_constraints(rep)
    if len(fp):
        p.add_constraints({1: fp}, np.zeros(len(fp)))
    p.add_constraint({1: np.eye(d)}, 1.0)
    sol = sdp_solve(p)
    upper = -sol.primal_value
    lower = -sol.dual_value
    sigma = sol.X[1]
    # exact objective at the returned sigma is a valid upper bound too; so is the twirl itself
    tw = twirl(rep, r)
    val, val_tw = trace_distance(r, sigma / np.trace(sigma).real), trace_distance(r, tw)
    if val_tw < val:
        sigma, val = tw, val_tw
    val = min(max(val, 0.0), 1.0)
    return MeasureResult("min_td_sym", val, lower=max(0.0, min(lower, val)), upper=max(val, upper),
                         gap=abs(upper - lower), certificate=sigma, iterations=sol.iterations)


def min_td_sandwich(rho, rep: GroupRep) -> tuple[float, float]:
    """Bounds (twirl_td / 2, twirl_td) on min_td_sym without solving an SDP."""
    t = twirl_td(rho, rep)
    return t / 2, t


def max_fid_sym(rho, rep: GroupRep) -> MeasureResult:
    """max over twirl-invariant sigma of F(rho, sigma).

    Uses sqrt F(rho, sigma) = max Re Tr[Z] over [[rho, Z], [Z^dagger, sigma]] ⪰ 0,
    with rho compressed to its support so the program is strictly feasible.
    """
    r = _state(rho, rep)
    d = rep.dim
    q = _support(r)
    k = q.shape[1]
    rc = dagger(q) @ r @ q
    n = k + d
    c = np.zeros((n, n), dtype=complex)
    c[:k, k:] = dagger(q) / 2
    c[k:, :k] = q / 2
    prob = SDPProblem([n]).set_objective(0, c)
    bk = hermitian_basis(k)
    emb = np.zeros((len(bk), n, n), dtype=complex)
    emb[:, :k, :k] = bk
    prob.add_constraints({0: emb}, [np.real(np.vdot(e, rc)) for e in bk])
    fp = _fixed_point_constraints(rep)
    if len(fp):
        big = np.zeros((len(fp), n, n), dtype=complex)
        big[:, k:, k:] = fp
        prob.add_constraints({0: big}, np.zeros(len(fp)))
    tr = np.zeros((n, n))
    tr[k:, k:] = np.eye(d)
    prob.add_constraint({0: tr}, 1.0)
    sol = sdp_solve(prob)
    sigma = sol.X[0][k:, k:]
    sigma = (sigma + dagger(sigma)) / 2
    sigma = sigma / np.trace(sigma).real
    exact = fidelity(r, sigma)
    # T(rho) is feasible; near F = 1 it can beat the interior-point optimum by more than its tolerance
    tw = twirl(rep, r)
    f_tw = fidelity(r, tw)
    if f_tw > exact:
        sigma, exact = tw, f_tw
    upper = min(1.0, max(sol.dual_value, 0.0) ** 2)
    lower = min(1.0, max(sol.primal_value, 0.0) ** 2)
    val = min(max(lower, exact), 1.0)
    return MeasureResult("max_fid_sym", val, lower=min(lower, exact), upper=max(upper, val),
                         gap=abs(upper - lower), certificate=sigma, iterations=sol.iterations)


def _split_dims(rho_s: np.ndarray, rep: GroupRep) -> tuple[int, int]:
    d_s = rho_s.shape[0]
    if rep.dim % d_s:
        raise ShapeError(f"representation dimension {rep.dim} is not a multiple of the state dimension {d_s}")
    return rep.dim // d_s, d_s


def bse_sdp(rho_s: np.ndarray, pi: np.ndarray, d_r: int):
    """max Tr[Pi omega] over omega ⪰ 0 on R ⊗ S with Tr_R omega = rho_s.

    ``omega`` is restricted to R ⊗ supp(rho_s), which every feasible point
    satisfies, so the reduced program has a strictly feasible point.
    """
    q = _support(rho_s)
    k = q.shape[1]
    j = np.kron(np.eye(d_r), q)
    pc = dagger(j) @ pi @ j
    rc = dagger(q) @ rho_s @ q
    prob = SDPProblem([d_r * k]).set_objective(0, (pc + dagger(pc)) / 2)
    basis = hermitian_basis(k)
    prob.add_constraints({0: np.array([np.kron(np.eye(d_r), e) for e in basis])},
                         [np.real(np.vdot(e, rc)) for e in basis])
    sol = sdp_solve(prob)
    omega = j @ sol.X[0] @ dagger(j)
    return sol, omega


def bse_fidelity(rho_s, rep: GroupRep, restarts: int = 20, seed=0, seesaw: bool = True) -> MeasureResult:
    """max over Bose-symmetric extendible sigma of F(rho_s, sigma) = max Tr[Pi omega].

    The SDP value is reported. When ``seesaw`` is set, a prover see-saw on the
    canonical purification gives an independent lower bound and ``gap`` is
    the SDP dual value minus that bound.
    """
    r = as_operator(rho_s)
    d_r, d_s = _split_dims(r, rep)
    pi = projector(rep)
    sol, omega = bse_sdp(r, pi, d_r)
    val = min(max(sol.primal_value, 0.0), 1.0)
    upper = min(max(sol.dual_value, val), 1.0)
    lower = val
    extra = {"sdp_gap": sol.gap}
    if seesaw:
        psi = purify(r)
        k = psi.subsystem_dims[0]
        ss = seesaw_prover(pi, psi.amplitudes.reshape(k, d_s), d_r, restarts=restarts, seed=seed)
        lower = ss.value
        extra["seesaw"] = ss.value
    return MeasureResult("bse_fidelity", val, lower=min(lower, val), upper=upper,
                         gap=max(0.0, upper - lower), certificate=omega, iterations=sol.iterations, extra=extra)


def eb_from_seesaw(m: np.ndarray, phis: np.ndarray) -> EBChannel:
    """EB channel with POVM rows of the Naimark isometry and the found states."""
    mus = [np.outer(row.conj(), row) for row in m]
    return EBChannel(tuple(mus), tuple(phis))


def sep_ext_bose(rho_s, rep: GroupRep, restarts: int = 20, seed=0, upper_bound: bool = True) -> MeasureResult:
    """Best separable-extension value found by an entanglement-breaking prover see-saw.

    This is a lower bound on max Tr[Pi omega] over separable extensions; the
    upper bound is the unrestricted extension SDP value. The certificate is
    the EB channel acting on the canonical purifying register.
    """
    r = as_operator(rho_s)
    d_r, d_s = _split_dims(r, rep)
    pi = projector(rep)
    psi = purify(r)
    k = psi.subsystem_dims[0]
    res = eb_seesaw(pi, psi.amplitudes.reshape(k, d_s), d_r, restarts=restarts, seed=seed)
    val = min(max(res.value, 0.0), 1.0)
    upper = 1.0
    if upper_bound:
        sol, _ = bse_sdp(r, pi, d_r)
        upper = min(max(sol.dual_value, val), 1.0)
    m, phis = res.argument
    return MeasureResult("sep_ext_bose", val, lower=val, upper=upper, gap=upper - val,
                         certificate=eb_from_seesaw(m, phis), iterations=res.iterations,
                         extra={"restarts": res.restarts})


def channel_bse_sdp(ch: QuantumChannel, pi: np.ndarray, d_r: int):
    """Joint SDP over (rho, omega): max Tr[Pi omega], Tr_R omega = N(rho), Tr rho = 1.

    ``omega`` is restricted to R ⊗ supp(N(I)), which contains the support of
    every channel output.
    """
    d_in = ch.in_dim
    q = _support(apply(ch, np.eye(d_in) / d_in))
    k = q.shape[1]
    j = np.kron(np.eye(d_r), q)
    pc = dagger(j) @ pi @ j
    prob = SDPProblem([d_in, d_r * k])
    prob.set_objective(1, (pc + dagger(pc)) / 2)
    basis = hermitian_basis(k)
    omega_terms = np.array([np.kron(np.eye(d_r), e) for e in basis])
    rho_terms = np.array([-adjoint_apply(ch, q @ e @ dagger(q)) for e in basis])
    prob.add_constraints({0: rho_terms, 1: omega_terms}, np.zeros(len(basis)))
    prob.add_constraint({0: np.eye(d_in)}, 1.0)
    sol = sdp_solve(prob)
    return sol, sol.X[0], j @ sol.X[1] @ dagger(j)


def channel_bse(ch: QuantumChannel, rep: GroupRep) -> MeasureResult:
    """max over inputs rho and BSE sigma of F(N(rho), sigma), as one joint SDP.

    For a fixed input the inner problem is the extension SDP, and the
    constraint Tr_R omega = N(rho) is jointly linear in (rho, omega), so the
    whole maximization is a single semidefinite program. The certificate is
    the optimal input state.
    """
    if rep.dim % ch.out_dim:
        raise ShapeError("representation dimension is not a multiple of the channel output dimension")
    d_r = rep.dim // ch.out_dim
    sol, rho, omega = channel_bse_sdp(ch, projector(rep), d_r)
    val = min(max(sol.primal_value, 0.0), 1.0)
    upper = min(max(sol.dual_value, val), 1.0)
    return MeasureResult("channel_bse", val, lower=val, upper=upper, gap=upper - val,
                         certificate=rho, iterations=sol.iterations, extra={"omega": omega})


# --- Hamiltonian measures ---------------------------------------------------

def _ham_norms(h, t: float, rep: GroupRep) -> np.ndarray:
    h = _check_hermitian(h, "Hamiltonian")
    if h.shape[0] != rep.dim:
        raise ShapeError("Hamiltonian dimension does not match representation")
    e = expm_hermitian(h, t)
    return np.array([spectral_norm(commutator(u, e)) ** 2 for u in rep.elements])


def ham_max_spec(h, t: float, rep: GroupRep) -> MeasureResult:
    """max_g ||[U(g), exp(-iHt)]||_inf^2 in [0, 4]; ties go to the smallest g."""
    norms = _ham_norms(h, t, rep)
    # near-ties from rounding also go to the smallest index
    g = int(np.flatnonzero(norms >= norms.max() - 1e-12)[0])
    return MeasureResult("ham_max_spec", float(norms[g]), argmax_g=g, extra={"per_g": norms.tolist()})


def ham_avg_spec(h, t: float, rep: GroupRep) -> MeasureResult:
    """(1/|G|) sum_g ||[U(g), exp(-iHt)]||_inf^2 in [0, 4]."""
    norms = _ham_norms(h, t, rep)
    return MeasureResult("ham_avg_spec", float(norms.mean()), extra={"per_g": norms.tolist()})
