"""Executable verifier-prover protocols, exact and shot-based.

Each protocol is simulated at the circuit level: the verifier's gates are
compiled from :mod:`symkit.circuits` and applied to explicit states, so the
exact acceptance probabilities here are an independent route to the values
computed in :mod:`symkit.measures`.

Decision conventions: protocols with a decision qubit accept on ``|1>``;
Hadamard-test protocols accept on ``|->``; the group-register tests accept
when the group register returns to ``|0>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .channels import EBChannel, eb_extend, purify
from .circuits import GateCircuit, Register, adjoint, compile_circuit, controlled, gate, qft, raw, run_state
from .errors import BadParams, ShapeError
from .measures import eb_from_seesaw
from .numerics import (
    _check_hermitian,
    as_operator,
    dagger,
    expm_hermitian,
    permute_subsystems,
)
from .optimize.haar import make_rng
from .optimize.seesaw import eb_seesaw, qip3_nested, seesaw_prover
from .reductions import P1, BQPCircuit, QIPDims, StatePrep, acceptance_probability, qip2_state, qip3_isometry
from .symmetry import GroupRep

PROTOCOL_KINDS = ("BoseTest", "HSSwapTest", "UhlmannFid", "SepExtEB", "HamQMA", "HamQAM",
                  "QIP2Generic", "QIP3Generic")
STRATEGY_KINDS = ("FixedIsometry", "FixedEBChannel", "FixedStateFamily", "Optimized", "None")


# --- prover strategies ------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ProverStrategy:
    """What the prover does in a protocol.

    ``FixedIsometry`` carries ``isometry`` (and, for three-message protocols,
    the first message ``state``); ``FixedEBChannel`` carries ``eb``;
    ``FixedStateFamily`` carries ``states`` (one joint state, or one state per
    group element); ``Optimized`` searches with ``restarts`` and ``seed``.
    """

    kind: str = "Optimized"
    isometry: Any = None
    state: Any = None
    eb: EBChannel | None = None
    states: Any = None
    restarts: int = 20
    seed: int = 0
    method: str = "default"

    def __post_init__(self):
        if self.kind not in STRATEGY_KINDS:
            raise ShapeError(f"unknown prover strategy {self.kind!r}")


def fixed_isometry(v, state=None) -> ProverStrategy:
    return ProverStrategy("FixedIsometry", isometry=np.asarray(v, dtype=complex),
                          state=None if state is None else np.asarray(state, dtype=complex))


def fixed_eb_channel(eb: EBChannel) -> ProverStrategy:
    return ProverStrategy("FixedEBChannel", eb=eb)


def fixed_state_family(states) -> ProverStrategy:
    return ProverStrategy("FixedStateFamily", states=states)


def optimized(restarts: int = 20, seed=0, method: str = "default") -> ProverStrategy:
    return ProverStrategy("Optimized", restarts=restarts, seed=seed, method=method)


NO_PROVER = ProverStrategy("None")


# --- protocols ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Protocol:
    """A verifier protocol; ``payload`` holds the circuits and data it runs on."""

    kind: str
    rep: GroupRep | None
    payload: dict
    decision: str = "D=1"

    def __post_init__(self):
        if self.kind not in PROTOCOL_KINDS:
            raise ShapeError(f"unknown protocol kind {self.kind!r}")


@dataclass
class ProtocolRun:
    probability: float
    strategy: ProverStrategy
    details: dict = field(default_factory=dict)


def _as_prep(prep) -> StatePrep:
    if isinstance(prep, StatePrep):
        return prep
    psi = purify(as_operator(prep))
    return StatePrep.from_purification(psi.amplitudes, psi.subsystem_dims, [1])


def _prep_matrix(prep: StatePrep) -> tuple[np.ndarray, np.ndarray]:
    """(A, U_perm): prepared vector as a (ref, kept) matrix and the prep unitary in that wire order."""
    dims = list(prep.dims)
    keep = sorted(prep.keep)
    ref = [i for i in range(len(dims)) if i not in keep]
    order = ref + keep
    u = np.asarray(prep.unitary, dtype=complex)
    u_perm = permute_subsystems(u, dims, order)
    d_ref = int(np.prod([dims[i] for i in ref])) if ref else 1
    psi = u_perm[:, 0].reshape(d_ref, -1)
    return psi, u_perm


def _select(rep: GroupRep) -> np.ndarray:
    """sum_g |g><g| ⊗ U(g)."""
    n, d = rep.order, rep.dim
    out = np.zeros((n * d, n * d), dtype=complex)
    for g, u in enumerate(rep.elements):
        out[g * d:(g + 1) * d, g * d:(g + 1) * d] = u
    return out


def bose_test_circuit(rep: GroupRep, ref_dim: int = 1) -> GateCircuit:
    """QFT on the group register C, select-U(g) on S, inverse QFT; registers C, R, S."""
    regs = (Register("C", dim=rep.order), Register("R", dim=ref_dim), Register("S", dim=rep.dim))
    return GateCircuit(regs, (qft("C"), raw(_select(rep), "C", "S"), adjoint(qft("C"))))


def _group_zero_prob(out: np.ndarray, order: int) -> float:
    amp = out.reshape(order, -1)[0]
    return float(np.real(np.vdot(amp, amp)))


def _bose_accept_pure(rep: GroupRep, psi: np.ndarray) -> float:
    """Acceptance of the group-register test on the pure state psi (a (ref, S) matrix)."""
    psi = np.asarray(psi, dtype=complex)
    c = bose_test_circuit(rep, psi.shape[0])
    start = np.zeros((rep.order, psi.size), dtype=complex)
    start[0] = psi.reshape(-1)
    return _group_zero_prob(run_state(c, start.reshape(-1)), rep.order)


def _bose_accept_mixed(rep: GroupRep, rho: np.ndarray) -> float:
    lam, vec = np.linalg.eigh((rho + dagger(rho)) / 2)
    total = 0.0
    for l, v in zip(lam, vec.T):
        if l > 1e-15:
            total += l * _bose_accept_pure(rep, v.reshape(1, -1))
    return total


def bose_test_protocol(rep: GroupRep, prep) -> Protocol:
    """Group-register Bose test on the state prepared by ``prep`` (a StatePrep or density matrix)."""
    prep = _as_prep(prep)
    psi, _ = _prep_matrix(prep)
    if psi.shape[1] != rep.dim:
        raise ShapeError("prepared state does not match the representation dimension")
    return Protocol("BoseTest", rep, {"prep": prep}, decision="C=0")


def swap_test_circuit(d: int) -> GateCircuit:
    """Hadamard, controlled-SWAP of two d-level registers, Hadamard."""
    swap = np.eye(d * d, dtype=complex)[[j * d + i for i in range(d) for j in range(d)]]
    regs = (Register("A", qubits=1), Register("S1", dim=d), Register("S2", dim=d))
    return GateCircuit(regs, (gate("H", "A"), controlled(raw(swap, "S1", "S2"), "A"), gate("H", "A")))


def hs_swap_protocol(rep: GroupRep, prep) -> Protocol:
    """Fair mixture of two SWAP tests; accepts with probability 1/2 + hs_asymmetry / 8.

    Branch one compares two copies of rho and accepts on the symmetric
    outcome. Branch two compares rho with U(g) rho U(g)^dagger for a uniform
    g and accepts on the antisymmetric outcome.
    """
    prep = _as_prep(prep)
    if prep.state().shape[0] != rep.dim:
        raise ShapeError("prepared state does not match the representation dimension")
    return Protocol("HSSwapTest", rep, {"prep": prep}, decision="mixed SWAP tests")


def _swap_outcome_probs(u: np.ndarray, rho: np.ndarray, sigma: np.ndarray) -> tuple[float, float]:
    d = rho.shape[0]
    start = np.kron(np.diag([1.0, 0.0]), np.kron(rho, sigma))
    out = u @ start @ dagger(u)
    p1 = float(np.real(np.trace(out[d * d:, d * d:])))
    return 1 - p1, p1


def uhlmann_protocol(prep, rep: GroupRep) -> Protocol:
    """Fidelity test between rho and its twirl: prover isometry V on the reference, then
    the inverse of the twirled-state preparation; accepts on all zeros."""
    prep = _as_prep(prep)
    psi, u_perm = _prep_matrix(prep)
    if psi.shape[1] != rep.dim:
        raise ShapeError("prepared state does not match the representation dimension")
    d_ref = psi.shape[0]
    regs = (Register("C", dim=rep.order), Register("R", dim=d_ref), Register("S", dim=rep.dim))
    bar = GateCircuit(regs, (raw(u_perm, "R", "S"), qft("C"), raw(_select(rep), "C", "S")))
    return Protocol("UhlmannFid", rep, {"prep": prep, "psi": psi, "bar": bar}, decision="all zeros")


def sep_ext_protocol(prep, rep: GroupRep) -> Protocol:
    """The verifier keeps S of a purification and sends S' to an entanglement-breaking
    prover, who returns R; then the Bose test on R ⊗ S."""
    prep = _as_prep(prep)
    rho = prep.state()
    if rep.dim % rho.shape[0]:
        raise ShapeError("representation dimension is not a multiple of dim S")
    return Protocol("SepExtEB", rep, {"prep": prep, "psi": purify(rho)}, decision="C=0")


def hadamard_test_circuit(h: np.ndarray, t: float, u: np.ndarray) -> GateCircuit:
    """|+> on C', then exp(iHt), controlled U^dagger, exp(-iHt), controlled U, and H on C'."""
    d = h.shape[0]
    regs = (Register("Cp", qubits=1), Register("P", dim=d))
    fwd = expm_hermitian(h, t)
    gates = (gate("H", "Cp"), raw(dagger(fwd), "P"), controlled(raw(dagger(u), "P"), "Cp"),
             raw(fwd, "P"), controlled(raw(u, "P"), "Cp"), gate("H", "Cp"))
    return GateCircuit(regs, gates)


def _ham_payload(h, t, rep):
    h = _check_hermitian(h, "Hamiltonian")
    if h.shape[0] != rep.dim:
        raise ShapeError("Hamiltonian dimension does not match representation")
    circuits = [hadamard_test_circuit(h, float(t), u) for u in rep.elements]
    return {"hamiltonian": h, "t": float(t), "circuits": circuits}


def ham_qma_protocol(h, t: float, rep: GroupRep) -> Protocol:
    """The prover sends a state on C ⊗ P; the verifier measures C to get g and runs the
    Hadamard test of W(g, t) = U(g) e^{-iHt} U(g)^dagger e^{iHt}, accepting on |->."""
    return Protocol("HamQMA", rep, _ham_payload(h, t, rep), decision="C'=|->")


def ham_qam_protocol(h, t: float, rep: GroupRep) -> Protocol:
    """g is drawn uniformly and shown to the prover, who sends a state on P; then the same
    Hadamard test as the QMA version. The exact value averages over every g."""
    return Protocol("HamQAM", rep, _ham_payload(h, t, rep), decision="C'=|->")


def qip2_protocol(u1, u2, x: int, dims: QIPDims) -> Protocol:
    """Two messages: U1 on S A -> S' R, prover R -> R' E', then U2 on R' S' -> D G."""
    u1 = np.asarray(compile_circuit(u1) if isinstance(u1, GateCircuit) else u1, dtype=complex)
    u2 = np.asarray(compile_circuit(u2) if isinstance(u2, GateCircuit) else u2, dtype=complex)
    psi = qip2_state(u1, x, dims)
    if u2.shape[0] != dims.r_p * dims.s_p:
        raise ShapeError("second verifier unitary does not act on R' S'")
    return Protocol("QIP2Generic", None, {"psi": psi, "u2": u2, "dims": dims})


def qip3_protocol(u1, u2, x: int, dims: QIPDims) -> Protocol:
    """Three messages: prover sends R'' E, U1 on S A R'' -> S' R, prover R E -> R' E', U2."""
    u1 = np.asarray(compile_circuit(u1) if isinstance(u1, GateCircuit) else u1, dtype=complex)
    u2 = np.asarray(compile_circuit(u2) if isinstance(u2, GateCircuit) else u2, dtype=complex)
    w = qip3_isometry(u1, x, dims)
    if u2.shape[0] != dims.r_p * dims.s_p:
        raise ShapeError("second verifier unitary does not act on R' S'")
    return Protocol("QIP3Generic", None, {"w": w, "u2": u2, "dims": dims})


# --- exact runs --------------------------------------------------------------

def _decision_accept(u2: np.ndarray, phi: np.ndarray) -> float:
    """phi[a, e, s] on R' E' S'; U2 on R' S' with the decision qubit most significant."""
    d_rp, d_ep, d_s = phi.shape
    t = np.transpose(phi, (0, 2, 1)).reshape(d_rp * d_s, d_ep)
    out = (u2 @ t).reshape(2, -1)
    return float(np.real(np.vdot(out[1], out[1])))


def _run_bose(p: Protocol, s: ProverStrategy) -> ProtocolRun:
    psi, _ = _prep_matrix(p.payload["prep"])
    return ProtocolRun(_bose_accept_pure(p.rep, psi), s)


def _run_hs(p: Protocol, s: ProverStrategy) -> ProtocolRun:
    rho = p.payload["prep"].state()
    u = compile_circuit(swap_test_circuit(rho.shape[0]))
    sym, _ = _swap_outcome_probs(u, rho, rho)
    anti = [_swap_outcome_probs(u, rho, g @ rho @ dagger(g))[1] for g in p.rep.elements]
    prob = 0.5 * sym + 0.5 * float(np.mean(anti))
    return ProtocolRun(prob, s, {"measure_estimate": 8 * (prob - 0.5)})


def _uhlmann_optimal(psi: np.ndarray, psi_bar: np.ndarray) -> np.ndarray:
    # |Tr[V A B^dagger]| is maximized by V = W U^dagger where A B^dagger = U S W^dagger
    u, _, wh = np.linalg.svd(psi @ dagger(psi_bar), full_matrices=False)
    return dagger(wh) @ dagger(u)


def _run_uhlmann(p: Protocol, s: ProverStrategy) -> ProtocolRun:
    psi = p.payload["psi"]
    bar = p.payload["bar"]
    d_ref, d_s = psi.shape
    k = p.rep.order * d_ref
    zero = np.zeros(bar.dim, dtype=complex)
    zero[0] = 1.0
    psi_bar = run_state(bar, zero).reshape(k, d_s)
    details = {}
    if s.kind == "Optimized":
        if s.method == "seesaw":
            ss = seesaw_prover(np.outer(psi_bar.reshape(-1), psi_bar.reshape(-1).conj()),
                               psi, k, 1, restarts=s.restarts, seed=s.seed)
            v = ss.argument
            details["seesaw"] = ss.value
        else:
            v = _uhlmann_optimal(psi, psi_bar)
    elif s.kind == "FixedIsometry":
        v = s.isometry
    else:
        raise ShapeError(f"{s.kind} strategy does not fit the Uhlmann protocol")
    if v.shape != (k, d_ref):
        raise ShapeError(f"prover isometry must map dim {d_ref} to dim {k}, got {v.shape}")
    sent = (v @ psi).reshape(-1)
    amp = run_state(bar.inverse(), sent)[0]
    return ProtocolRun(float(abs(amp) ** 2), s, details)


def _run_sep_ext(p: Protocol, s: ProverStrategy) -> ProtocolRun:
    psi = p.payload["psi"]
    k, d_s = psi.subsystem_dims
    d_r = p.rep.dim // d_s
    details = {}
    if s.kind == "Optimized":
        from .symmetry import projector
        res = eb_seesaw(projector(p.rep), psi.amplitudes.reshape(k, d_s), d_r,
                        restarts=s.restarts, seed=s.seed)
        eb = eb_from_seesaw(*res.argument)
        details["optimizer_value"] = res.value
    elif s.kind == "FixedEBChannel":
        eb = s.eb
    else:
        raise ShapeError(f"{s.kind} strategy does not fit the separable-extension protocol")
    if eb.in_dim != k or eb.out_dim != d_r:
        raise ShapeError(f"EB channel must map dim {k} to dim {d_r}")
    omega = eb_extend(eb, psi.amplitudes)
    return ProtocolRun(_bose_accept_mixed(p.rep, omega), s, details)


def _hadamard_accept(c: GateCircuit, vec: np.ndarray) -> float:
    start = np.concatenate([vec, np.zeros_like(vec)])
    out = run_state(c, start).reshape(2, -1)
    return float(np.real(np.vdot(out[1], out[1])))


def _top_vector(p: Protocol, g: int) -> tuple[float, np.ndarray]:
    # the best |psi_g> is the top right singular vector of I - W(g, t)
    h, t = p.payload["hamiltonian"], p.payload["t"]
    e = expm_hermitian(h, t)
    u = p.rep.elements[g]
    w = u @ e @ dagger(u) @ dagger(e)
    m = np.eye(h.shape[0]) - w
    _, sv, vh = np.linalg.svd(m)
    return float(sv[0] ** 2), vh[0].conj()


def _ham_accepts(p: Protocol, s: ProverStrategy) -> tuple[np.ndarray, np.ndarray, dict]:
    """(weights p(g), per-g acceptance) for the prover's strategy."""
    n, d = p.rep.order, p.rep.dim
    circuits = p.payload["circuits"]
    details: dict = {}
    if s.kind == "Optimized":
        vecs = [_top_vector(p, g)[1] for g in range(n)]
        acc = np.array([_hadamard_accept(circuits[g], vecs[g]) for g in range(n)])
        if p.kind == "HamQMA":
            # point mass on the best g; ties go to the smallest index
            g = int(np.flatnonzero(acc >= acc.max() - 1e-12)[0])
            weights = np.zeros(n)
            weights[g] = 1.0
            details["argmax_g"] = g
        else:
            weights = np.full(n, 1.0 / n)
        return weights, acc, details
    if s.kind != "FixedStateFamily":
        raise ShapeError(f"{s.kind} strategy does not fit the Hamiltonian protocols")
    if p.kind == "HamQMA":
        joint = np.asarray(s.states, dtype=complex).reshape(-1)
        if joint.size != n * d:
            raise ShapeError(f"prover state must live on C ⊗ P of dim {n * d}")
        joint = joint.reshape(n, d) / np.linalg.norm(joint)
        weights = np.real(np.sum(np.abs(joint) ** 2, axis=1))
        acc = np.array([_hadamard_accept(circuits[g], joint[g] / np.sqrt(weights[g])) if weights[g] > 0 else 0.0
                        for g in range(n)])
        return weights, acc, details
    family = [np.asarray(v, dtype=complex).reshape(-1) for v in s.states]
    if len(family) != n or any(v.size != d for v in family):
        raise ShapeError(f"need one state of dim {d} per group element ({n})")
    acc = np.array([_hadamard_accept(circuits[g], v / np.linalg.norm(v)) for g, v in enumerate(family)])
    return np.full(n, 1.0 / n), acc, details


def _run_ham(p: Protocol, s: ProverStrategy) -> ProtocolRun:
    weights, acc, details = _ham_accepts(p, s)
    details["per_g"] = acc.tolist()
    return ProtocolRun(float(weights @ acc), s, details)


def _run_qip2(p: Protocol, s: ProverStrategy) -> ProtocolRun:
    psi, u2, dims = p.payload["psi"], p.payload["u2"], p.payload["dims"]
    psi_r = psi.T  # prover input index first
    details = {}
    if s.kind == "Optimized":
        pi = dagger(u2) @ np.kron(P1, np.eye(u2.shape[0] // 2)) @ u2
        res = seesaw_prover(pi, psi_r, dims.r_p, restarts=s.restarts, seed=s.seed)
        v = res.argument
        details["optimizer_value"] = res.value
    elif s.kind == "FixedIsometry":
        v = s.isometry
    else:
        raise ShapeError(f"{s.kind} strategy does not fit the two-message protocol")
    if v.shape[1] != dims.r or v.shape[0] % dims.r_p:
        raise ShapeError("prover isometry must map R to R' ⊗ E'")
    phi = (v @ psi_r).reshape(dims.r_p, v.shape[0] // dims.r_p, dims.s_p)
    return ProtocolRun(_decision_accept(u2, phi), s, details)


def _run_qip3(p: Protocol, s: ProverStrategy) -> ProtocolRun:
    w, u2, dims = p.payload["w"], p.payload["u2"], p.payload["dims"]
    details = {}
    if s.kind == "Optimized":
        pi = dagger(u2) @ np.kron(P1, np.eye(u2.shape[0] // 2)) @ u2
        res = qip3_nested(pi, w, dims.s_p, dims.r, dims.r_p, restarts=s.restarts, seed=s.seed)
        psi, v = res.argument
        details["optimizer_value"] = res.value
    elif s.kind == "FixedIsometry":
        psi, v = s.state, s.isometry
        if psi is None:
            raise ShapeError("three-message strategies need the first message as `state`")
    else:
        raise ShapeError(f"{s.kind} strategy does not fit the three-message protocol")
    d_e = psi.size // dims.r_pp
    if psi.size != dims.r_pp * d_e or v.shape[1] != dims.r * d_e or v.shape[0] % dims.r_p:
        raise ShapeError("prover messages do not fit R'' ⊗ E and R ⊗ E -> R' ⊗ E'")
    chi = np.einsum("srq,qe->res", w.reshape(dims.s_p, dims.r, dims.r_pp), psi.reshape(dims.r_pp, d_e))
    phi = (v @ chi.reshape(dims.r * d_e, dims.s_p)).reshape(dims.r_p, v.shape[0] // dims.r_p, dims.s_p)
    return ProtocolRun(_decision_accept(u2, phi), s, details)


_RUNNERS = {
    "BoseTest": _run_bose, "HSSwapTest": _run_hs, "UhlmannFid": _run_uhlmann, "SepExtEB": _run_sep_ext,
    "HamQMA": _run_ham, "HamQAM": _run_ham, "QIP2Generic": _run_qip2, "QIP3Generic": _run_qip3,
}


def run_detailed(p: Protocol, s: ProverStrategy | None = None) -> ProtocolRun:
    s = optimized() if s is None else s
    run = _RUNNERS[p.kind](p, s)
    run.probability = min(max(run.probability, 0.0), 1.0)
    return run


def run_exact(p: Protocol, s: ProverStrategy | None = None) -> float:
    """Exact acceptance probability of the protocol against the prover strategy."""
    return run_detailed(p, s).probability


def run_shots(p: Protocol, s: ProverStrategy | None, n: int, seed) -> tuple[float, int]:
    """Sample the decision outcome ``n`` times; returns (estimate, accept count).

    For the QAM protocol each shot draws its own uniform g, as in the protocol.
    """
    if n < 1:
        raise BadParams("shot count must be at least 1")
    rng = make_rng(seed)
    s = optimized() if s is None else s
    if p.kind == "HamQAM":
        _, acc, _ = _ham_accepts(p, s)
        gs = rng.integers(p.rep.order, size=n)
        count = int(np.sum(rng.random(n) < np.clip(acc[gs], 0, 1)))
    else:
        count = int(rng.binomial(n, run_exact(p, s)))
    return count / n, count


# --- shot planning -----------------------------------------------------------

@dataclass(frozen=True)
class ShotPlan:
    epsilon: float
    delta: float
    M: float
    n: int
    squared: bool = False

    def to_json(self) -> dict:
        return {"epsilon": self.epsilon, "delta": self.delta, "M": self.M, "n": self.n, "squared": self.squared}


def _smallest_int_at_least(bound: float) -> int:
    # guard against the bound landing a few ulps above an integer
    return max(1, math.ceil(bound * (1 - 1e-12)))


def _check_eps_delta(epsilon, delta):
    if not 0 < epsilon < 1:
        raise BadParams(f"epsilon must lie in (0, 1), got {epsilon}")
    if not 0 < delta < 1:
        raise BadParams(f"delta must lie in (0, 1), got {delta}")


def plan_shots(epsilon: float, delta: float, M: float = 1.0) -> ShotPlan:
    """Hoeffding count: n >= M^2 / (2 eps^2) ln(2 / delta) for samples in a range of width M."""
    _check_eps_delta(epsilon, delta)
    if not M > 0:
        raise BadParams(f"range width M must be positive, got {M}")
    n = _smallest_int_at_least(M * M / (2 * epsilon * epsilon) * math.log(2 / delta))
    return ShotPlan(float(epsilon), float(delta), float(M), n)


def plan_shots_squared(epsilon: float, delta: float) -> ShotPlan:
    """m >= ln(2 / delta) / (2 eps^4): eps^2 accuracy on Z gives eps accuracy on sqrt(Z)."""
    _check_eps_delta(epsilon, delta)
    m = _smallest_int_at_least(math.log(2 / delta) / (2 * epsilon ** 4))
    return ShotPlan(float(epsilon), float(delta), 1.0, m, squared=True)


def sqrt_estimator(z_bar: float) -> float:
    if not -1e-12 <= z_bar <= 1 + 1e-12:
        raise BadParams(f"sample mean must lie in [0, 1], got {z_bar}")
    return math.sqrt(min(max(z_bar, 0.0), 1.0))


def estimate_rejection(q: BQPCircuit, epsilon: float, delta: float, seed) -> tuple[float, ShotPlan]:
    """Estimate p_rej of a circuit from paired runs that both reject (mean p_rej^2), then take the root."""
    plan = plan_shots_squared(epsilon, delta)
    p_rej = 1 - acceptance_probability(q)
    rng = make_rng(seed)
    z = rng.binomial(plan.n, min(max(p_rej * p_rej, 0.0), 1.0))
    return sqrt_estimator(z / plan.n), plan


def trial_seeds(seed: int, k: int) -> Sequence[int]:
    """k independent 64-bit seeds derived from a root seed."""
    return [int(ss.generate_state(1, dtype=np.uint64)[0]) for ss in np.random.SeedSequence(seed).spawn(k)]


def hoeffding_trials(p_true: float, plan: ShotPlan, repeats: int, seed) -> np.ndarray:
    """Estimates from ``repeats`` independent batches of ``plan.n`` Bernoulli(p_true) shots."""
    out = np.empty(repeats)
    for i, sd in enumerate(trial_seeds(seed, repeats)):
        out[i] = np.mean(make_rng(sd).random(plan.n) < p_true)
    return out


def protocol_for_instance(inst) -> Protocol:
    """The protocol whose optimized acceptance probability decides the instance."""
    k, pl = inst.kind, inst.payload
    if k == "StateBose":
        return bose_test_protocol(inst.rep, pl["state"])
    if k == "StateHS":
        return hs_swap_protocol(inst.rep, pl["state"])
    if k in ("StateSymFid", "StateSymTD"):
        return uhlmann_protocol(pl["state"], inst.rep)
    if k == "SepExtBose":
        return sep_ext_protocol(pl["state"], inst.rep)
    if k == "StateBSE" and "u2" in pl:
        return Protocol("QIP2Generic", None, {"psi": pl["psi"], "u2": pl["u2"], "dims": pl["dims"]})
    if k == "ChannelBSE" and "u2" in pl:
        return Protocol("QIP3Generic", None, {"w": pl["w"], "u2": pl["u2"], "dims": pl["dims"]})
    if k == "HamMaxSpec":
        return ham_qma_protocol(pl["hamiltonian"], pl["t"], inst.rep)
    if k == "HamAvgSpec":
        return ham_qam_protocol(pl["hamiltonian"], pl["t"], inst.rep)
    raise ShapeError(f"no protocol is defined for a {k} instance without circuit data")
