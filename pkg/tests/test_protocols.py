import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from symkit import measures as ms
from symkit import protocols as pr
from symkit import reductions as red
from symkit.channels import EBChannel
from symkit.circuits import GateCircuit, Register, gate
from symkit.errors import BadParams, ShapeError
from symkit.numerics import fidelity
from symkit.optimize.haar import haar_random_state, haar_random_unitary, make_rng, random_density
from symkit.symmetry import c2_from_unitary, projector, shift_rep, swap_rep, twirl

from conftest import I2, X, Z, dm, ket, random_hermitian, random_rep

seeds = st.integers(0, 2**32 - 1)
MZ = c2_from_unitary(-Z)


def test_bose_test_examples():
    rep = shift_rep(3)
    pi = projector(rep)
    rho = pi @ random_density(3, make_rng(2)) @ pi
    assert pr.run_exact(pr.bose_test_protocol(rep, rho / np.trace(rho).real)) == pytest.approx(1)
    assert pr.run_exact(pr.bose_test_protocol(MZ, dm([1, 0]))) == pytest.approx(0, abs=1e-12)
    bell = dm(ket(1, 0, 0, 1))
    assert pr.run_exact(pr.bose_test_protocol(swap_rep(2), bell)) == pytest.approx(1)
    with pytest.raises(ShapeError):
        pr.bose_test_protocol(MZ, np.eye(3) / 3)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_bose_test_matches_measure(seed):
    rng = make_rng(seed)
    rep = random_rep(rng)
    rho = random_density(rep.dim, rng)
    p = pr.run_exact(pr.bose_test_protocol(rep, rho))
    assert p == pytest.approx(ms.bose_symmetry(rho, rep).value, abs=1e-10)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_hs_swap_affine_in_measure(seed):
    rng = make_rng(seed)
    rep = random_rep(rng)
    rho = random_density(rep.dim, rng)
    run = pr.run_detailed(pr.hs_swap_protocol(rep, rho))
    assert run.probability == pytest.approx(0.5 + ms.hs_asymmetry(rho, rep).value / 8, abs=1e-10)
    assert run.details["measure_estimate"] == pytest.approx(ms.hs_asymmetry(rho, rep).value, abs=1e-9)


def test_uhlmann_examples():
    rep = shift_rep(3)
    sym = twirl(rep, random_density(3, 4))
    assert pr.run_exact(pr.uhlmann_protocol(sym, rep)) == pytest.approx(1, abs=1e-9)
    rho = dm([1, 0])
    assert pr.run_exact(pr.uhlmann_protocol(rho, shift_rep(2))) == pytest.approx(0.5, abs=1e-9)


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_uhlmann_optimal_equals_twirl_fidelity(seed):
    rng = make_rng(seed)
    rep = random_rep(rng)
    rho = random_density(rep.dim, rng)
    p = pr.uhlmann_protocol(rho, rep)
    val = pr.run_exact(p)
    assert val == pytest.approx(fidelity(rho, twirl(rep, rho)), abs=1e-6)
    # a fixed prover never beats the optimal one
    d_ref = p.payload["psi"].shape[0]
    v = haar_random_unitary(rep.order * d_ref, rng)[:, :d_ref]
    assert pr.run_exact(p, pr.fixed_isometry(v)) <= val + 1e-9


def test_uhlmann_seesaw_cross_check():
    rng = make_rng(5)
    rep = shift_rep(2)
    rho = random_density(2, rng)
    p = pr.uhlmann_protocol(rho, rep)
    run = pr.run_detailed(p, pr.optimized(restarts=10, seed=1, method="seesaw"))
    assert run.probability == pytest.approx(pr.run_exact(p), abs=1e-6)


def test_sep_ext_protocol_matches_measure():
    rng = make_rng(6)
    for _ in range(4):
        rho = random_density(2, rng)
        v = np.eye(4) - 2 * dm(haar_random_state(4, rng).amplitudes)
        rep = c2_from_unitary(v)
        run = pr.run_exact(pr.sep_ext_protocol(rho, rep))
        assert run == pytest.approx(ms.sep_ext_bose(rho, rep).value, abs=1e-5)
    # a fixed measure-prepare prover: trash the input, send |0>
    p = pr.sep_ext_protocol(I2 / 2, c2_from_unitary(np.kron(Z, I2)))
    eb = EBChannel([np.eye(2)], [ket(1, 0)])
    assert pr.run_exact(p, pr.fixed_eb_channel(eb)) == pytest.approx(1)


def test_ham_examples():
    for t in np.linspace(0.1, 3, 10):
        assert pr.run_exact(pr.ham_qma_protocol(Z, t, c2_from_unitary(Z))) == pytest.approx(0, abs=1e-12)
        assert pr.run_exact(pr.ham_qam_protocol(Z, t, c2_from_unitary(Z))) == pytest.approx(0, abs=1e-12)
    assert pr.run_exact(pr.ham_qma_protocol(Z, np.pi / 2, shift_rep(2))) == pytest.approx(1, abs=1e-12)
    assert pr.run_exact(pr.ham_qam_protocol(Z, np.pi / 2, shift_rep(2))) == pytest.approx(0.5, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_ham_qma_equals_w_norm(seed):
    rng = make_rng(seed)
    rep = random_rep(rng)
    h = random_hermitian(rep.dim, rng)
    t = float(rng.uniform(0, 3))
    e = expm(-1j * t * h)
    w = [u @ e @ u.conj().T @ e.conj().T for u in rep]
    oracle = 0.25 * max(np.linalg.norm(np.eye(rep.dim) - wg, 2) ** 2 for wg in w)
    run = pr.run_detailed(pr.ham_qma_protocol(h, t, rep))
    assert run.probability == pytest.approx(oracle, abs=1e-8)
    assert run.probability == pytest.approx(ms.ham_max_spec(h, t, rep).value / 4, abs=1e-8)
    assert run.details["argmax_g"] == ms.ham_max_spec(h, t, rep).argmax_g
    assert pr.run_exact(pr.ham_qam_protocol(h, t, rep)) == pytest.approx(ms.ham_avg_spec(h, t, rep).value / 4,
                                                                          abs=1e-8)


def test_ham_fixed_strategies_bounded_by_optimum():
    rng = make_rng(7)
    rep = shift_rep(2)
    h = random_hermitian(2, rng)
    qma = pr.ham_qma_protocol(h, 1.3, rep)
    qam = pr.ham_qam_protocol(h, 1.3, rep)
    joint = haar_random_state(4, rng).amplitudes
    fam = [haar_random_state(2, rng).amplitudes for _ in range(2)]
    assert pr.run_exact(qma, pr.fixed_state_family(joint)) <= pr.run_exact(qma) + 1e-12
    assert pr.run_exact(qam, pr.fixed_state_family(fam)) <= pr.run_exact(qam) + 1e-12
    with pytest.raises(ShapeError):
        pr.run_exact(qam, pr.fixed_state_family(fam[:1]))
    with pytest.raises(ShapeError):
        pr.run_exact(qma, pr.NO_PROVER)


def test_qip_protocols_match_sdp():
    rng = make_rng(8)
    dims = red.QIPDims(s=4, a=1, s_p=2, r=2, r_p=2)
    u1, u2 = haar_random_unitary(4, rng), haar_random_unitary(4, rng)
    p2 = pr.qip2_protocol(u1, u2, 1, dims)
    want = red.qip2_to_bse(u1, u2, 1, dims).measure().value
    assert pr.run_exact(p2) == pytest.approx(want, abs=1e-5)
    v = haar_random_unitary(4, rng)[:, :2]
    assert pr.run_exact(p2, pr.fixed_isometry(v)) <= want + 1e-8
    d3 = red.QIPDims(s=2, a=2, s_p=2, r=4, r_p=2, r_pp=2)
    u1, u2 = haar_random_unitary(8, rng), haar_random_unitary(4, rng)
    p3 = pr.qip3_protocol(u1, u2, 0, d3)
    want = red.qip3_to_channel_bse(u1, u2, 0, d3).measure().value
    assert pr.run_exact(p3) == pytest.approx(want, abs=1e-4)


def test_protocol_for_instance():
    rng = make_rng(9)
    q = red.random_bqp(rng)
    inst = red.bqp_to_bose(q)
    assert pr.run_exact(pr.protocol_for_instance(inst)) == pytest.approx(red.acceptance_probability(q), abs=1e-10)
    inst = red.random_qip2(rng)
    assert pr.run_exact(pr.protocol_for_instance(inst)) == pytest.approx(inst.measure().value, abs=1e-5)
    with pytest.raises(ShapeError):
        pr.protocol_for_instance(red.random_qma(rng))


def test_run_shots_examples():
    one = pr.bose_test_protocol(MZ, dm([0, 1]))
    zero = pr.bose_test_protocol(MZ, dm([1, 0]))
    assert pr.run_shots(one, None, 100, 1) == (1.0, 100)
    assert pr.run_shots(zero, None, 100, 1) == (0.0, 0)
    half = pr.bose_test_protocol(MZ, I2 / 2)
    n = pr.plan_shots(0.05, 0.05, 1).n
    ests = [pr.run_shots(half, None, n, s)[0] for s in pr.trial_seeds(3, 200)]
    assert np.mean(np.abs(np.array(ests) - 0.5) <= 0.05) >= 0.95
    assert pr.run_shots(half, None, 500, 4) == pr.run_shots(half, None, 500, 4)
    with pytest.raises(BadParams):
        pr.run_shots(half, None, 0, 1)


def test_run_shots_qam_samples_g():
    p = pr.ham_qam_protocol(Z, np.pi / 2, shift_rep(2))
    est, count = pr.run_shots(p, None, 4000, 11)
    assert abs(est - 0.5) < 0.05 and 0 <= est <= 1


def test_plan_examples():
    assert pr.plan_shots(0.01, 0.05, 1).n == 18445 == math.ceil(5000 * math.log(40))
    sq = pr.plan_shots_squared(0.1, 0.05)
    assert sq.n == 18445 and sq.squared
    assert pr.plan_shots(0.01, 0.05, 2).n == pytest.approx(4 * 18445, abs=4)
    for bad in ((0, 0.05, 1), (0.1, 1.0, 1), (0.1, 0.05, 0)):
        with pytest.raises(BadParams):
            pr.plan_shots(*bad)


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-3, 0.5), st.floats(1e-4, 0.5), st.floats(0.1, 4))
def test_plan_is_smallest_integer(eps, delta, m):
    n = pr.plan_shots(eps, delta, m).n
    bound = m * m / (2 * eps * eps) * math.log(2 / delta)
    assert n >= bound * (1 - 1e-12) and n - 1 < bound


def test_sqrt_estimator():
    assert pr.sqrt_estimator(0) == 0 and pr.sqrt_estimator(1) == 1
    assert pr.sqrt_estimator(0.25) == 0.5
    with pytest.raises(BadParams):
        pr.sqrt_estimator(1.5)


def test_rejection_estimate_harness():
    q = red.BQPCircuit(GateCircuit((Register("S", qubits=1), Register("A", qubits=1)), (gate("H", "A"),)),
                       "0", "S", "A")
    hits = [abs(pr.estimate_rejection(q, 0.05, 0.05, s)[0] - 0.5) <= 0.05 for s in pr.trial_seeds(1, 200)]
    assert np.mean(hits) >= 0.95
