"""Builders mapping circuits of a complexity class to symmetry-testing instances.

Each builder returns a :class:`SymmetryInstance`; each ``verify_*`` function
recomputes the corresponding equality through an independent route (direct
simulation or a prover optimizer) and reports the discrepancy.

Register conventions for the interactive-proof builders:

* the first verifier unitary outputs ``S' ⊗ R`` (kept register first),
* the prover maps ``R`` (plus its ancilla) to ``R' ⊗ E'``,
* the second verifier unitary acts on ``R' ⊗ S'`` and outputs ``D ⊗ G`` with
  the decision qubit ``D`` as the most significant factor.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from . import measures
from .channels import QuantumChannel, from_circuit_dilation, from_isometry
from .numerics import permutation_matrix
from .circuits import (
    GateCircuit,
    Register,
    basis_index,
    compile_circuit,
    conjugate,
    gate,
    raw,
    run_state,
)
from .errors import BadCircuit, BadThresholds, ShapeError
from .numerics import PureState, as_operator, dagger, partial_trace, trace_norm
from .optimize.haar import haar_random_state, haar_random_unitary, make_rng, random_density
from .optimize.seesaw import eb_seesaw, qip3_nested, seesaw_prover
from .symmetry import GroupRep, c2_from_unitary, projector

Z = np.diag([1.0, -1.0]).astype(complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
P1 = np.diag([0.0, 1.0]).astype(complex)

RANGE_MAX = {
    "StateBose": 1.0, "ChannelBose": 1.0, "StateSymTD": 1.0, "StateSymFid": 1.0,
    "StateBSE": 1.0, "SepExtBose": 1.0, "ChannelBSE": 1.0, "HamMaxSpec": 4.0, "HamAvgSpec": 4.0,
}
INSTANCE_KINDS = ("StateBose", "StateHS", "ChannelBose", "StateSymTD", "StateSymFid",
                  "StateBSE", "SepExtBose", "ChannelBSE", "HamMaxSpec", "HamAvgSpec")
OPTIMIZED_KINDS = ("StateSymTD", "StateSymFid", "StateBSE", "SepExtBose", "ChannelBSE")


def range_max(kind: str, rep: GroupRep) -> float:
    if kind == "StateHS":
        return measures.gamma_bound(rep.order)
    return RANGE_MAX[kind]


@dataclass(eq=False)
class SymmetryInstance:
    """A symmetry-testing problem instance with promise thresholds (alpha, beta).

    ``payload`` holds the concrete data: ``state`` for state problems,
    ``channel`` for channel problems, ``hamiltonian`` and ``t`` for
    Hamiltonian problems, plus any circuits the instance was built from.
    """

    kind: str
    rep: GroupRep
    payload: dict
    alpha: float = 1.0
    beta: float = 0.0

    def __post_init__(self):
        if self.kind not in INSTANCE_KINDS:
            raise ShapeError(f"unknown instance kind {self.kind!r}")
        top = range_max(self.kind, self.rep)
        if not (0 <= self.beta < self.alpha <= top + 1e-12):
            raise BadThresholds(f"thresholds need 0 <= beta < alpha <= {top}, got ({self.alpha}, {self.beta})")

    @property
    def state(self) -> np.ndarray:
        return self.payload["state"]

    @property
    def channel(self) -> QuantumChannel:
        return self.payload["channel"]

    def measure(self, **kw) -> measures.MeasureResult:
        """Evaluate the measure that this instance's promise refers to."""
        k = self.kind
        if k == "StateBose":
            return measures.bose_symmetry(self.state, self.rep)
        if k == "StateHS":
            return measures.hs_asymmetry(self.state, self.rep)
        if k == "ChannelBose":
            return measures.channel_bose_max(self.channel, self.rep)
        if k == "StateSymTD":
            return measures.min_td_sym(self.state, self.rep)
        if k == "StateSymFid":
            return measures.max_fid_sym(self.state, self.rep)
        if k == "StateBSE":
            return measures.bse_fidelity(self.state, self.rep, **kw)
        if k == "SepExtBose":
            return measures.sep_ext_bose(self.state, self.rep, **kw)
        if k == "ChannelBSE":
            return measures.channel_bse(self.channel, self.rep)
        if k == "HamMaxSpec":
            return measures.ham_max_spec(self.payload["hamiltonian"], self.payload["t"], self.rep)
        return measures.ham_avg_spec(self.payload["hamiltonian"], self.payload["t"], self.rep)

    def decide(self, value: float, tol: float | None = None) -> str:
        """yes / no / outside-promise, with slack ``tol`` for numerical error
        (1e-6 for optimizer-backed kinds, 1e-9 otherwise)."""
        if tol is None:
            tol = 1e-6 if self.kind in OPTIMIZED_KINDS else 1e-9
        if value >= self.alpha - tol:
            return "yes"
        if value <= self.beta + tol:
            return "no"
        return "outside-promise"


@dataclass(frozen=True, eq=False)
class BQPCircuit:
    """Circuit Q with input register ``input_register`` set to ``input_x``; the other
    registers start in |0>. ``decision`` names the single decision qubit D; all
    remaining wires form the garbage register G."""

    circuit: GateCircuit
    input_x: str = ""
    input_register: str = "S"
    decision: Any = 0

    def __post_init__(self):
        c = self.circuit
        try:
            d = c.wire_index(self.decision)
        except Exception as exc:
            raise BadCircuit(f"decision wire {self.decision!r} not in circuit") from exc
        if c.wire_dims[d] != 2:
            raise BadCircuit("decision wire must be a qubit")
        if self.input_x:
            wires = c.register_wires(self.input_register)
            if len(self.input_x) != len(wires) or set(self.input_x) - {"0", "1"}:
                raise BadCircuit(f"input {self.input_x!r} does not fit register {self.input_register}")
        object.__setattr__(self, "decision", d)

    def input_index(self) -> int:
        c = self.circuit
        digits = [0] * len(c.wire_dims)
        if self.input_x:
            for w, b in zip(c.register_wires(self.input_register), self.input_x):
                digits[w] = int(b)
        return basis_index(c, digits)

    def output_state(self) -> np.ndarray:
        vec = np.zeros(self.circuit.dim, dtype=complex)
        vec[self.input_index()] = 1.0
        return run_state(self.circuit, vec)


def _decision_prob(vec: np.ndarray, dims: Sequence[int], wire: int) -> float:
    t = np.abs(vec.reshape(dims)) ** 2
    return float(np.take(t, 1, axis=wire).sum())


def acceptance_probability(q: BQPCircuit) -> float:
    """Pr[D = 1] from the column of the compiled unitary (independent of the state simulator)."""
    u = compile_circuit(q.circuit)
    col = u[:, q.input_index()]
    return _decision_prob(col, q.circuit.wire_dims, q.decision)


def decision_state(q: BQPCircuit) -> np.ndarray:
    """rho_D = Tr_G of the output state."""
    return partial_trace(q.output_state(), q.circuit.wire_dims, [q.decision])


@dataclass
class Verification:
    name: str
    ok: bool
    lhs: float
    rhs: float
    tol: float
    details: dict = field(default_factory=dict)

    @property
    def diff(self) -> float:
        return abs(self.lhs - self.rhs)

    def to_json(self) -> dict:
        out = {"name": self.name, "ok": bool(self.ok), "lhs": float(self.lhs), "rhs": float(self.rhs),
               "diff": float(self.diff), "tol": self.tol}
        out.update({k: v for k, v in self.details.items() if isinstance(v, (int, float, str, bool))})
        return out


def _check(name, lhs, rhs, tol, **details) -> Verification:
    return Verification(name, bool(abs(lhs - rhs) <= tol), float(lhs), float(rhs), tol, details)


# --- BQP ---------------------------------------------------------------------

def bqp_to_bose(q: BQPCircuit) -> SymmetryInstance:
    """Decision-qubit state with the group {I, -Z}; Tr[Pi rho_D] is the acceptance probability."""
    rho = decision_state(q)
    return SymmetryInstance("StateBose", c2_from_unitary(-Z), {"state": rho, "bqp": q})


def verify_bqp_to_bose(q: BQPCircuit, tol: float = 1e-10) -> Verification:
    inst = bqp_to_bose(q)
    return _check("bqp_to_bose", inst.measure().value, acceptance_probability(q), tol)


def bqp_to_hs(q: BQPCircuit) -> SymmetryInstance:
    """State |x><x| ⊗ |0><0|_AC with the group {I, Q^dagger CNOT_{D->C} Q}; measure = 1 - p_rej^2."""
    c = q.circuit
    ext = c.extend(Register("C", qubits=1))
    cwire = ext.wire_index("C")
    v = compile_circuit(conjugate(ext, gate("CX", q.decision, cwire)))
    rep = c2_from_unitary(v)
    vec = np.zeros(ext.dim, dtype=complex)
    # input index of the extended circuit: old index with C = 0 appended as least significant
    vec[q.input_index() * 2] = 1.0
    rho = np.outer(vec, vec.conj())
    return SymmetryInstance("StateHS", rep, {"state": rho, "bqp": q, "circuit": ext})


def verify_bqp_to_hs(q: BQPCircuit, tol: float = 1e-9) -> Verification:
    inst = bqp_to_hs(q)
    res = inst.measure()
    p_rej = 1 - acceptance_probability(q)
    v = _check("bqp_to_hs", res.value, 1 - p_rej ** 2, tol, route_diff=res.extra["route_diff"])
    v.ok = v.ok and res.extra["route_diff"] <= tol
    return v


# --- QMA ---------------------------------------------------------------------

def _prep_input(c: GateCircuit, register: str, x: str) -> GateCircuit:
    """Prefix X gates so that ``register`` starts in |x> while every wire starts in |0>."""
    pre = [gate("X", w) for w, b in zip(c.register_wires(register), x) if b == "1"] if x else []
    return GateCircuit(c.registers, tuple(pre) + c.gates)


def qma_to_channel_bose(c: GateCircuit, x: str = "", decision=0, input_register: str = "S",
                        prover_register: str = "P") -> SymmetryInstance:
    """Channel N_{P->D}(sigma) = Tr_G[Q(|x><x| ⊗ |0><0| ⊗ sigma)Q^dagger] with the group {I, -Z}."""
    if prover_register not in [r.name for r in c.registers]:
        raise BadCircuit(f"circuit has no prover register {prover_register!r}")
    full = _prep_input(c, input_register, x)
    d = full.wire_index(decision)
    p_wires = full.register_wires(prover_register)
    traced = [w for w in range(len(full.wire_dims)) if w != d]
    ch = from_circuit_dilation(compile_circuit(full), full.wire_dims, p_wires, traced)
    return SymmetryInstance("ChannelBose", c2_from_unitary(-Z),
                            {"channel": ch, "circuit": c, "x": x, "decision": d, "prover_register": prover_register})


def qma_accept(inst: SymmetryInstance, sigma) -> float:
    """Pr[accept] for prover state sigma by running the circuit on |x, 0, sigma>."""
    c = _prep_input(inst.payload["circuit"], "S", inst.payload["x"])
    p_wires = c.register_wires(inst.payload["prover_register"])
    dims = c.wire_dims
    n = len(dims)
    others = [w for w in range(n) if w not in p_wires]
    vec = np.asarray(sigma, dtype=complex).reshape(-1)
    # place the prover state on its wires, |0> elsewhere
    d_p = int(np.prod([dims[w] for w in p_wires]))
    full = np.zeros((d_p, int(np.prod([dims[w] for w in others]))), dtype=complex)
    full[:, 0] = vec
    t = full.reshape([dims[w] for w in p_wires] + [dims[w] for w in others])
    order = np.argsort(p_wires + others)
    state = np.transpose(t, order).reshape(-1)
    out = run_state(c, state)
    return _decision_prob(out, dims, inst.payload["decision"])


def verify_qma_to_channel_bose(inst: SymmetryInstance, samples: int = 1000, seed=0,
                               tol: float = 1e-9) -> Verification:
    res = inst.measure()
    c = _prep_input(inst.payload["circuit"], "S", inst.payload["x"])
    u = compile_circuit(c)
    dims = c.wire_dims
    d = inst.payload["decision"]
    p_wires = c.register_wires(inst.payload["prover_register"])
    # lambda_max of (<x,0| ⊗ I_P) Q^dagger (|1><1|_D ⊗ I) Q (|x,0> ⊗ I_P), from the full unitary
    n_p = int(np.prod([dims[w] for w in p_wires]))
    cols = []
    for j in range(n_p):
        e = np.zeros(n_p)
        e[j] = 1
        digits = np.unravel_index(j, [dims[w] for w in p_wires])
        full_digits = [0] * len(dims)
        for w, dg in zip(p_wires, digits):
            full_digits[w] = int(dg)
        cols.append(u[:, basis_index(c, full_digits)])
    a = np.stack(cols, axis=1).reshape(dims + [n_p])
    a1 = np.take(a, 1, axis=d).reshape(-1, n_p)
    lam = float(np.linalg.eigvalsh(dagger(a1) @ a1)[-1])
    rng = make_rng(seed)
    worst = -np.inf
    for _ in range(samples):
        worst = max(worst, qma_accept(inst, haar_random_state(n_p, rng).amplitudes))
    attained = qma_accept(inst, res.certificate)
    ok = abs(res.value - lam) <= tol and worst <= res.value + tol and abs(attained - res.value) <= 1e-10
    return Verification("qma_to_channel_bose", ok, res.value, lam, tol,
                        {"max_sampled": worst, "attained": attained})


# --- QSZK --------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class StatePrep:
    """Unitary U on wires of dims ``dims``; the prepared state is Tr_traced[U|0><0|U^dagger]."""

    unitary: np.ndarray
    dims: tuple
    keep: tuple

    def state(self) -> np.ndarray:
        u = np.asarray(self.unitary, dtype=complex)
        return partial_trace(u[:, 0], list(self.dims), list(self.keep))

    @classmethod
    def from_circuit(cls, c: GateCircuit, keep: Sequence) -> StatePrep:
        return cls(compile_circuit(c), tuple(c.wire_dims), tuple(c.wire_index(w) for w in keep))

    @classmethod
    def from_purification(cls, psi: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> StatePrep:
        from .channels import complete_isometry
        v = np.asarray(psi, dtype=complex).reshape(-1, 1)
        return cls(complete_isometry(v / np.linalg.norm(v)), tuple(dims), tuple(keep))


def _prep_state(p) -> np.ndarray:
    if isinstance(p, StatePrep):
        return p.state()
    if isinstance(p, GateCircuit):
        raise BadCircuit("pass a StatePrep to say which wires are kept")
    return as_operator(p)


def qsd_to_symtd(c0, c1, alpha: float = 1.0, beta: float = 0.0) -> SymmetryInstance:
    """tau_FB = (|0><0| ⊗ w0 + |1><1| ⊗ w1)/2 with the group {I ⊗ I, X_F ⊗ I}."""
    w0, w1 = _prep_state(c0), _prep_state(c1)
    if w0.shape != w1.shape:
        raise ShapeError("the two prepared states have different dimensions")
    d = w0.shape[0]
    tau = 0.5 * (np.kron(np.diag([1.0, 0.0]), w0) + np.kron(np.diag([0.0, 1.0]), w1))
    rep = c2_from_unitary(np.kron(X, np.eye(d)))
    return SymmetryInstance("StateSymTD", rep, {"state": tau, "omega0": w0, "omega1": w1}, alpha, beta)


def verify_qsd_to_symtd(inst: SymmetryInstance, tol: float = 1e-10) -> Verification:
    lhs = measures.twirl_td(inst.state, inst.rep)
    rhs = 0.25 * trace_norm(inst.payload["omega0"] - inst.payload["omega1"])
    return _check("qsd_to_symtd", lhs, rhs, tol)


def polarized_thresholds(n: int) -> tuple[float, float]:
    """Sym-TD thresholds reached from polarized distinguishability with parameter n."""
    if n < 1:
        raise BadThresholds("polarization parameter must be a positive integer")
    return (1 - 2.0 ** -n) / 4, 2.0 ** (-n - 1)


def polarized_gap(n: int) -> bool:
    a, b = polarized_thresholds(n)
    return a > b


def map_td_to_fid_thresholds(alpha: float, beta: float) -> tuple[float, float]:
    if not (0 <= beta < alpha <= 1):
        raise BadThresholds(f"need 0 <= beta < alpha <= 1, got ({alpha}, {beta})")
    return (1 - beta) ** 2, 1 - alpha ** 2


def symtd_to_symfid(inst: SymmetryInstance) -> SymmetryInstance:
    """Same state and group, thresholds (alpha, beta) -> ((1 - beta)^2, 1 - alpha^2)."""
    if inst.kind != "StateSymTD":
        raise ShapeError("symtd_to_symfid expects a StateSymTD instance")
    a, b = map_td_to_fid_thresholds(inst.alpha, inst.beta)
    if not b < a:
        raise BadThresholds(f"mapped fidelity thresholds ({a}, {b}) have no gap")
    return SymmetryInstance("StateSymFid", inst.rep, dict(inst.payload), a, b)


def verify_symtd_to_symfid(inst: SymmetryInstance, tol: float = 1e-7) -> Verification:
    """Fuchs-van de Graaf consequences: F_max <= 1 - TD_min^2 and 1 - sqrt(F_max) <= TD_min."""
    td = measures.min_td_sym(inst.state, inst.rep)
    fid = measures.max_fid_sym(inst.state, inst.rep)
    upper = 1 - td.value ** 2
    ok = fid.value <= upper + tol and 1 - np.sqrt(fid.value) <= td.value + tol
    return Verification("symtd_to_symfid", ok, fid.value, upper, tol, {"min_td": td.value})


# --- QIP(2) ------------------------------------------------------------------

def _as_unitary(u) -> np.ndarray:
    if isinstance(u, GateCircuit):
        return compile_circuit(u)
    return np.asarray(u, dtype=complex)


def decision_rep(u2: np.ndarray) -> GroupRep:
    """{I, U^dagger (-Z_D ⊗ I_G) U}; its projector is U^dagger (|1><1|_D ⊗ I) U."""
    u2 = _as_unitary(u2)
    g = u2.shape[0] // 2
    v = dagger(u2) @ np.kron(-Z, np.eye(g)) @ u2
    return c2_from_unitary((v + dagger(v)) / 2)


@dataclass(frozen=True)
class QIPDims:
    s: int = 1
    a: int = 1
    s_p: int = 2
    r: int = 2
    r_p: int = 2
    r_pp: int = 1


def qip2_state(u1, x: int, dims: QIPDims) -> np.ndarray:
    """|psi> = U1 |x>_S |0>_A as an (S', R) matrix."""
    u1 = _as_unitary(u1)
    if u1.shape[0] != dims.s * dims.a or dims.s * dims.a != dims.s_p * dims.r:
        raise ShapeError("first verifier unitary does not match S A -> S' R")
    return u1[:, x * dims.a].reshape(dims.s_p, dims.r)


def qip2_to_bse(u1, u2, x: int, dims: QIPDims) -> SymmetryInstance:
    """rho_S' = Tr_R[U1|x,0><x,0|U1^dagger] with the group {I, U2^dagger(-Z_D ⊗ I)U2} on R' ⊗ S'."""
    psi = qip2_state(u1, x, dims)
    u2 = _as_unitary(u2)
    if u2.shape[0] != dims.r_p * dims.s_p:
        raise ShapeError("second verifier unitary does not act on R' S'")
    rho = psi @ dagger(psi)
    return SymmetryInstance("StateBSE", decision_rep(u2), {"state": rho, "psi": psi, "u2": u2, "dims": dims})


def qip2_accept(inst: SymmetryInstance, restarts: int = 20, seed=0) -> float:
    """Best acceptance probability of the two-message protocol over prover isometries."""
    dims = inst.payload["dims"]
    pi = projector(inst.rep)
    return seesaw_prover(pi, inst.payload["psi"].T, dims.r_p, restarts=restarts, seed=seed).value


def verify_qip2_to_bse(inst: SymmetryInstance, tol: float = 1e-5, seed=0) -> Verification:
    sdp = measures.bse_fidelity(inst.state, inst.rep, seesaw=False).value
    return _check("qip2_to_bse", sdp, qip2_accept(inst, seed=seed), tol)


# --- QIP(3) ------------------------------------------------------------------

def qip3_isometry(u1, x: int, dims: QIPDims) -> np.ndarray:
    """W = U1(|x>_S |0>_A ⊗ I_R''): R'' -> S' ⊗ R."""
    u1 = _as_unitary(u1)
    if u1.shape[0] != dims.s * dims.a * dims.r_pp or dims.s * dims.a * dims.r_pp != dims.s_p * dims.r:
        raise ShapeError("first verifier unitary does not match S A R'' -> S' R")
    cols = [(x * dims.a + 0) * dims.r_pp + j for j in range(dims.r_pp)]
    return u1[:, cols]


def qip3_to_channel_bse(u1, u2, x: int, dims: QIPDims) -> SymmetryInstance:
    """Channel N_{R''->S'} = Tr_R[W . W^dagger] with the decision group on R' ⊗ S'."""
    w = qip3_isometry(u1, x, dims)
    ch = from_isometry(w, dims.s_p)
    u2 = _as_unitary(u2)
    return SymmetryInstance("ChannelBSE", decision_rep(u2), {"channel": ch, "w": w, "u2": u2, "dims": dims})


def qip3_accept(inst: SymmetryInstance, restarts: int = 50, seed=0) -> float:
    dims = inst.payload["dims"]
    pi = projector(inst.rep)
    return qip3_nested(pi, inst.payload["w"], dims.s_p, dims.r, dims.r_p, restarts=restarts, seed=seed).value


def verify_qip3_to_channel_bse(inst: SymmetryInstance, tol: float = 1e-4, seed=0) -> Verification:
    return _check("qip3_to_channel_bse", inst.measure().value, qip3_accept(inst, seed=seed), tol)


# --- QIP_EB(2) ---------------------------------------------------------------

def qipeb2_to_sepext(v, psi, d_r: int, d_s: int) -> SymmetryInstance:
    """Group {I, V^dagger(-Z_D ⊗ I)V} on R' ⊗ S with rho_S = Tr_R[psi_RS].

    ``v`` acts on R' ⊗ S with the decision qubit first in its output; ``psi``
    is a pure state on R ⊗ S whose R part is sent to the prover.
    """
    v = _as_unitary(v)
    vec = np.asarray(psi.amplitudes if isinstance(psi, PureState) else psi, dtype=complex).reshape(d_r, d_s)
    rho = vec.T @ vec.conj()
    rep = decision_rep(v)
    if rep.dim % d_s:
        raise ShapeError("verifier dimension is not a multiple of dim S")
    return SymmetryInstance("SepExtBose", rep, {"state": rho, "psi": vec, "v": v})


def qipeb2_accept(inst: SymmetryInstance, restarts: int = 20, seed=1) -> float:
    """Best EB-prover acceptance, optimized on the verifier's own state psi_RS."""
    d_s = inst.state.shape[0]
    d_rp = inst.rep.dim // d_s
    return eb_seesaw(projector(inst.rep), inst.payload["psi"], d_rp, restarts=restarts, seed=seed).value


def verify_qipeb2_to_sepext(inst: SymmetryInstance, tol: float = 1e-5, seed=0) -> Verification:
    res = measures.sep_ext_bose(inst.state, inst.rep, seed=seed)
    sim = qipeb2_accept(inst, seed=seed + 1)
    v = _check("qipeb2_to_sepext", res.value, sim, tol, upper=res.upper)
    v.ok = v.ok and res.value <= res.upper + 1e-8
    return v


# --- random instance generators ------------------------------------------------

def random_circuit(registers: Sequence[Register], depth: int, rng) -> GateCircuit:
    """Brickwork of Haar-random two-qubit gates interleaved with named single-qubit gates."""
    rng = make_rng(rng)
    base = GateCircuit(tuple(registers))
    n = len(base.wire_dims)
    gates = []
    names = ["H", "S", "T", "X"]
    for layer in range(depth):
        if n == 1:
            gates.append(raw(haar_random_unitary(2, rng), 0))
            continue
        start = layer % 2
        for w in range(start, n - 1, 2):
            gates.append(raw(haar_random_unitary(4, rng), w, w + 1))
        w = int(rng.integers(n))
        gates.append(gate(names[int(rng.integers(len(names)))], w))
    return GateCircuit(tuple(registers), tuple(gates))


def random_bqp(rng, n_qubits: int | None = None) -> BQPCircuit:
    rng = make_rng(rng)
    n = int(rng.integers(3, 6)) if n_qubits is None else n_qubits
    k = int(rng.integers(1, n))
    regs = (Register("S", qubits=k), Register("A", qubits=n - k))
    c = random_circuit(regs, depth=int(rng.integers(2, 5)), rng=rng)
    x = "".join(str(int(b)) for b in rng.integers(0, 2, k))
    return BQPCircuit(c, x, "S", int(rng.integers(n)))


def random_qma(rng):
    rng = make_rng(rng)
    regs = (Register("S", qubits=1), Register("A", qubits=1), Register("P", qubits=int(rng.integers(1, 3))))
    c = random_circuit(regs, depth=3, rng=rng)
    return qma_to_channel_bose(c, x=str(int(rng.integers(2))), decision=int(rng.integers(3)))


def random_qsd(rng) -> SymmetryInstance:
    rng = make_rng(rng)
    d = int(rng.choice([2, 3, 4]))
    return qsd_to_symtd(random_density(d, rng, rank=int(rng.integers(1, d + 1))),
                        random_density(d, rng, rank=int(rng.integers(1, d + 1))))


def random_qip2(rng, dims: QIPDims | None = None) -> SymmetryInstance:
    rng = make_rng(rng)
    if dims is None:
        s_p, r, r_p = [(2, 2, 2), (2, 4, 2), (4, 2, 2), (4, 4, 4), (2, 2, 4)][int(rng.integers(5))]
        dims = QIPDims(s=s_p * r, a=1, s_p=s_p, r=r, r_p=r_p)
    u1 = haar_random_unitary(dims.s * dims.a, rng)
    u2 = haar_random_unitary(dims.r_p * dims.s_p, rng)
    return qip2_to_bse(u1, u2, int(rng.integers(dims.s)), dims)


def random_qip3(rng, dims: QIPDims | None = None) -> SymmetryInstance:
    rng = make_rng(rng)
    if dims is None:
        s_p, r, r_pp, r_p = [(2, 2, 2, 2), (2, 4, 2, 2), (4, 2, 2, 2), (2, 4, 4, 2)][int(rng.integers(4))]
        dims = QIPDims(s=2, a=s_p * r // (2 * r_pp), s_p=s_p, r=r, r_p=r_p, r_pp=r_pp)
    u1 = haar_random_unitary(dims.s * dims.a * dims.r_pp, rng)
    u2 = haar_random_unitary(dims.r_p * dims.s_p, rng)
    return qip3_to_channel_bse(u1, u2, int(rng.integers(dims.s)), dims)


def random_qipeb2(rng) -> SymmetryInstance:
    rng = make_rng(rng)
    d_r, d_s, d_rp = [(2, 2, 2), (2, 2, 1), (4, 2, 2)][int(rng.integers(3))]
    if d_rp * d_s < 2:
        d_rp = 2
    v = haar_random_unitary(d_rp * d_s, rng)
    psi = haar_random_state(d_r * d_s, rng)
    return qipeb2_to_sepext(v, psi, d_r, d_s)


def planted_sepext(rng) -> SymmetryInstance:
    """Instance whose separable optimum is 1: Pi = |phi><phi|_R' ⊗ I_S exactly.

    The verifier unitary maps |phi> ⊗ I_S to the |1>_D sector, so the product
    extension phi ⊗ rho_S is accepted with certainty.
    """
    rng = make_rng(rng)
    d_rp, d_s, d_r = 2, 2, 2
    w = haar_random_unitary(d_rp, rng)
    # columns of w: w[:, 0] = phi. Relabel so phi -> |1>: V = (X w^dagger) ⊗ U_S
    v = np.kron(X @ dagger(w), haar_random_unitary(d_s, rng))
    psi = haar_random_state(d_r * d_s, rng)
    return qipeb2_to_sepext(v, psi, d_r, d_s)


def constant_decision_unitary(d_rp: int, d_data: int, accept: bool) -> np.ndarray:
    """Second verifier unitary on R' ⊗ (S'_data ⊗ C) that moves the verifier's own
    |0> ancilla C to the decision slot, flipping it when ``accept`` is set.

    The decision then ignores the prover entirely, so the value is exactly 1 or 0.
    """
    perm = permutation_matrix([d_rp, d_data, 2], [2, 0, 1])
    flip = np.kron(X, np.eye(d_rp * d_data)) if accept else np.eye(2 * d_rp * d_data)
    return flip @ perm


def _with_ancilla(u: np.ndarray) -> np.ndarray:
    """u ⊗ I_C on a fresh qubit appended as the least significant factor."""
    return np.kron(u, np.eye(2))


def degenerate_qip2(accept: bool, rng) -> SymmetryInstance:
    """Two-message instance whose verifier decides from its own ancilla only."""
    rng = make_rng(rng)
    s_data, r, r_p = 2, 2, 2
    u1 = _with_ancilla(haar_random_unitary(s_data * r, rng))
    # U1 ⊗ I_C outputs (S'_data R) C; reorder to S' = (S'_data C) followed by R
    u1 = permutation_matrix([s_data, r, 2], [0, 2, 1]) @ u1
    dims = QIPDims(s=s_data * r, a=2, s_p=2 * s_data, r=r, r_p=r_p)
    u2 = constant_decision_unitary(r_p, s_data, accept)
    return qip2_to_bse(u1, u2, int(rng.integers(dims.s)), dims)


def degenerate_qip3(accept: bool, rng) -> SymmetryInstance:
    """Three-message instance whose verifier decides from its own ancilla only."""
    rng = make_rng(rng)
    s_data, r, r_p, r_pp = 2, 2, 2, 2
    # U1 on S A R'' -> (S'_data R) with S = A = trivial-size registers except R''
    core = haar_random_unitary(s_data * r, rng)  # acts on (A R'') with A of dim 2
    u1 = permutation_matrix([s_data, r, 2], [0, 2, 1]) @ _with_ancilla(core)
    # inputs: A (dim 2) ⊗ R'' (dim 2) ⊗ C (dim 2); S is trivial
    dims = QIPDims(s=1, a=4, s_p=2 * s_data, r=r, r_p=r_p, r_pp=r_pp)
    u1 = u1 @ permutation_matrix([2, 2, r_pp], [0, 2, 1])
    u2 = constant_decision_unitary(r_p, s_data, accept)
    return qip3_to_channel_bse(u1, u2, 0, dims)


def verify_trial(kind: str, i: int, trial_seed: int) -> Verification:
    """One randomized trial of a reduction verifier."""
    rng = make_rng(trial_seed)
    if kind == "bqp_to_bose":
        v = verify_bqp_to_bose(random_bqp(rng))
    elif kind == "bqp_to_hs":
        v = verify_bqp_to_hs(random_bqp(rng))
    elif kind == "qma_to_channel_bose":
        v = verify_qma_to_channel_bose(random_qma(rng), samples=200, seed=rng)
    elif kind == "qsd_to_symtd":
        v = verify_qsd_to_symtd(random_qsd(rng))
    elif kind == "symtd_to_symfid":
        v = verify_symtd_to_symfid(symtd_to_symfid(random_qsd(rng)))
    elif kind == "qip2_to_bse":
        v = verify_qip2_to_bse(random_qip2(rng), seed=i)
    elif kind == "qip3_to_channel_bse":
        v = verify_qip3_to_channel_bse(random_qip3(rng), seed=i)
    elif kind == "qipeb2_to_sepext":
        v = verify_qipeb2_to_sepext(random_qipeb2(rng), seed=i)
    else:
        raise ShapeError(f"unknown reduction kind {kind!r}")
    v.details["trial"] = i
    v.details["seed"] = trial_seed
    return v


def trial_seeds(seed: int, trials: int) -> list[int]:
    return [int(ss.generate_state(1, dtype=np.uint64)[0]) for ss in np.random.SeedSequence(seed).spawn(trials)]


def run_verification(kind: str, trials: int, seed: int, workers: int = 1) -> list[Verification]:
    """Randomized verifier harness; trial i uses the i-th seed spawned from the root seed,
    so results do not depend on ``workers``."""
    if kind not in REDUCTION_KINDS:
        raise ShapeError(f"unknown reduction kind {kind!r}; expected one of {REDUCTION_KINDS}")
    seeds = trial_seeds(seed, trials)
    if workers <= 1 or trials <= 1:
        return [verify_trial(kind, i, s) for i, s in enumerate(seeds)]
    from concurrent.futures import ThreadPoolExecutor
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(verify_trial, [kind] * trials, range(trials), seeds))


REDUCTION_KINDS = ("bqp_to_bose", "bqp_to_hs", "qma_to_channel_bose", "qsd_to_symtd", "symtd_to_symfid",
                   "qip2_to_bse", "qip3_to_channel_bse", "qipeb2_to_sepext")
