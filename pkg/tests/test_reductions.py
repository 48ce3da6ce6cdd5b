import numpy as np
import pytest

from symkit import measures as ms
from symkit import reductions as red
from symkit.circuits import GateCircuit, Register, gate
from symkit.errors import BadCircuit, BadThresholds, ShapeError
from symkit.numerics import trace_norm
from symkit.optimize.haar import haar_random_unitary, make_rng, random_density
from symkit.symmetry import validate_rep

from conftest import dm

SA = (Register("S", qubits=1), Register("A", qubits=1))


def bqp(*gates, decision="A"):
    return red.BQPCircuit(GateCircuit(SA, gates), "0", "S", decision)


def test_bqp_to_bose_examples():
    assert red.bqp_to_bose(bqp(gate("X", "A"))).measure().value == pytest.approx(1)
    assert red.bqp_to_bose(bqp()).measure().value == pytest.approx(0)
    assert red.bqp_to_bose(bqp(gate("H", "A"))).measure().value == pytest.approx(0.5)


def test_bqp_to_hs_examples():
    assert red.bqp_to_hs(bqp()).measure().value == pytest.approx(0, abs=1e-12)
    assert red.bqp_to_hs(bqp(gate("X", "A"))).measure().value == pytest.approx(1)
    assert red.bqp_to_hs(bqp(gate("H", "A"))).measure().value == pytest.approx(0.75)


def test_bqp_circuit_validation():
    with pytest.raises(BadCircuit):
        red.BQPCircuit(GateCircuit(SA), "0", "S", "D")
    with pytest.raises(BadCircuit):
        red.BQPCircuit(GateCircuit(SA), "01", "S", "A")


SAP = (Register("S", qubits=1), Register("A", qubits=1), Register("P", qubits=1))


def qma(*gates):
    return red.qma_to_channel_bose(GateCircuit(SAP, gates), "0", "A", "S", "P")


def test_qma_examples():
    assert qma(gate("CX", "P", "A")).measure().value == pytest.approx(1)
    assert qma(gate("H", "A")).measure().value == pytest.approx(0.5)
    assert qma().measure().value == pytest.approx(0, abs=1e-12)
    with pytest.raises(BadCircuit):
        red.qma_to_channel_bose(GateCircuit(SA), "0", "A", "S", "P")


def test_qsd_examples():
    w = random_density(2, 3)
    assert ms.twirl_td(red.qsd_to_symtd(w, w).state, red.qsd_to_symtd(w, w).rep) == pytest.approx(0, abs=1e-12)
    inst = red.qsd_to_symtd(dm([1, 0]), dm([0, 1]))
    tau = inst.state
    # 4x4 oracle: tau_bar = I/4, tau = diag(1/2, 0, 0, 1/2)
    assert 0.5 * trace_norm(tau - np.eye(4) / 4) == pytest.approx(0.5)
    assert ms.twirl_td(tau, inst.rep) == pytest.approx(0.5)
    lo = ms.min_td_sym(tau, inst.rep).value
    assert lo - 1e-7 <= 0.5 <= 2 * lo + 1e-7
    with pytest.raises(ShapeError):
        red.qsd_to_symtd(dm([1, 0]), np.eye(3) / 3)


def test_threshold_maps():
    assert red.map_td_to_fid_thresholds(1, 0) == (1, 0)
    a, b = red.map_td_to_fid_thresholds(0.9, 0.1)
    assert (a, b) == pytest.approx((0.81, 0.19))
    grid = np.linspace(0.05, 1, 20)
    nos = [red.map_td_to_fid_thresholds(al, 0.01)[1] for al in grid]
    yeses = [red.map_td_to_fid_thresholds(0.99, be)[0] for be in grid[:-1] * 0.9]
    assert all(np.diff(nos) < 0) and all(np.diff(yeses) < 0)
    with pytest.raises(BadThresholds):
        red.map_td_to_fid_thresholds(0.2, 0.3)
    # (0.5, 0.3) -> (0.49, 0.75): no gap, so the reduction refuses it
    with pytest.raises(BadThresholds):
        red.symtd_to_symfid(red.qsd_to_symtd(dm([1, 0]), dm([0, 1]), 0.5, 0.3))


def test_polarized_thresholds():
    assert red.polarized_thresholds(1) == (0.125, 0.25)
    assert not red.polarized_gap(1)
    assert all(red.polarized_gap(n) for n in range(2, 30))
    with pytest.raises(BadThresholds):
        red.polarized_thresholds(0)


def test_symtd_to_symfid_instance():
    inst = red.symtd_to_symfid(red.qsd_to_symtd(dm([1, 0]), random_density(2, 1), 0.9, 0.1))
    assert inst.kind == "StateSymFid"
    assert (inst.alpha, inst.beta) == pytest.approx((0.81, 0.19))
    assert red.verify_symtd_to_symfid(inst).ok


def test_qip2_degenerate():
    rng = make_rng(1)
    assert red.degenerate_qip2(True, rng).measure().value == pytest.approx(1, abs=1e-6)
    assert red.degenerate_qip2(False, rng).measure().value <= 1e-6


def test_qip3_degenerate_and_cx_pattern():
    rng = make_rng(2)
    assert red.degenerate_qip3(True, rng).measure().value == pytest.approx(1, abs=1e-5)
    assert red.degenerate_qip3(False, rng).measure().value <= 1e-5
    dims = red.QIPDims(s=2, a=1, s_p=2, r=2, r_p=2, r_pp=2)
    cx_rev = np.eye(4)[[0, 3, 2, 1]]  # control S', target R'; D is the R' output
    inst = red.qip3_to_channel_bse(np.eye(4), cx_rev, 1, dims)
    v = red.verify_qip3_to_channel_bse(inst)
    assert v.ok, v


def test_qipeb2_examples():
    rng = make_rng(3)
    assert red.planted_sepext(rng).measure().value == pytest.approx(1, abs=1e-6)
    # S = (data qubit, verifier ancilla C in |0>); the decision is read from C alone
    data = random_density(4, rng, rank=1)
    vec = np.kron(np.linalg.eigh(data)[1][:, -1], [1, 0])  # R ⊗ S_data ⊗ C
    for accept, want in ((True, 1.0), (False, 0.0)):
        v = red.constant_decision_unitary(2, 2, accept)
        inst = red.qipeb2_to_sepext(v, vec, 2, 4)
        assert inst.measure().value == pytest.approx(want, abs=1e-6)
        assert red.verify_qipeb2_to_sepext(inst).ok


@pytest.mark.parametrize("kind", ["bqp_to_bose", "bqp_to_hs", "qma_to_channel_bose", "qsd_to_symtd",
                                  "qip2_to_bse", "qip3_to_channel_bse", "qipeb2_to_sepext"])
def test_builder_reps_are_involutions(kind):
    rng = make_rng(4)
    if kind.startswith("bqp"):
        q = red.random_bqp(rng)
        inst = red.bqp_to_bose(q) if kind == "bqp_to_bose" else red.bqp_to_hs(q)
    else:
        inst = {"qma_to_channel_bose": red.random_qma, "qsd_to_symtd": red.random_qsd,
                "qip2_to_bse": red.random_qip2, "qip3_to_channel_bse": red.random_qip3, "qipeb2_to_sepext": red.random_qipeb2}[kind](rng)
    rep = inst.rep
    validate_rep(rep.elements, rep.mult_table)
    v = rep.elements[1]
    assert np.linalg.norm(v @ v - np.eye(rep.dim)) <= 1e-10


@pytest.mark.parametrize("kind", red.REDUCTION_KINDS)
def test_verifier_hundred_trials(kind):
    trials = red.run_verification(kind, 100, seed=2026)
    bad = [t.to_json() for t in trials if not t.ok]
    assert not bad, bad[:3]


def test_trials_do_not_depend_on_workers():
    a = red.run_verification("qsd_to_symtd", 6, seed=5)
    b = red.run_verification("qsd_to_symtd", 6, seed=5, workers=3)
    assert [t.to_json() for t in a] == [t.to_json() for t in b]
    with pytest.raises(ShapeError):
        red.run_verification("nope", 1, 0)


def test_instance_threshold_invariants():
    rho = random_density(2, 1)
    from symkit.symmetry import shift_rep
    with pytest.raises(BadThresholds):
        red.SymmetryInstance("StateBose", shift_rep(2), {"state": rho}, 0.3, 0.5)
    with pytest.raises(BadThresholds):
        red.SymmetryInstance("StateHS", shift_rep(2), {"state": rho}, 1.5, 0.0)
    assert red.SymmetryInstance("HamMaxSpec", shift_rep(2), {"hamiltonian": np.eye(2), "t": 1.0}, 4.0, 0.0)
