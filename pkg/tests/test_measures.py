import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from symkit import measures as ms
from symkit.channels import from_kraus, identity_channel, apply
from symkit.errors import NotHermitian, ShapeError
from symkit.numerics import commutator, hs_norm, trace_norm
from symkit.optimize.haar import haar_random_state, haar_random_unitary, make_rng, random_density
from symkit.symmetry import c2_from_unitary, projector, shift_rep, swap_rep, trivial_rep, twirl

from conftest import I2, X, Z, dm, ket, random_hermitian, random_rep

seeds = st.integers(0, 2**32 - 1)
MZ = c2_from_unitary(-Z)


def test_bose_examples():
    assert ms.bose_symmetry(dm([0, 1]), MZ).value == pytest.approx(1)
    assert ms.bose_symmetry(dm([1, 0]), MZ).value == pytest.approx(0)
    assert ms.bose_symmetry(I2 / 2, MZ).value == pytest.approx(0.5)
    with pytest.raises(ShapeError):
        ms.bose_symmetry(np.eye(3) / 3, MZ)


def test_hs_examples():
    sym = twirl(shift_rep(3), random_density(3, 2))
    assert ms.hs_asymmetry(sym, shift_rep(3)).value == pytest.approx(0, abs=1e-12)
    for d in (2, 3, 5):
        assert ms.hs_asymmetry(dm(np.eye(d)[0]), shift_rep(d)).value == pytest.approx(2 * (1 - 1 / d), abs=1e-12)
    plus = dm(ket(1, 1))
    rep = c2_from_unitary(Z)
    # two-term commutator oracle: (0 + ||[Z, |+><+|]||_2^2) / 2
    oracle = (0 + hs_norm(commutator(Z, plus)) ** 2) / 2
    assert oracle == pytest.approx(1)
    assert ms.hs_asymmetry(plus, rep).value == pytest.approx(1, abs=1e-12)


def test_gamma_bound():
    assert [ms.gamma_bound(k) for k in (1, 2, 4)] == [0, 1, 1.5]


def test_channel_bose_examples():
    r = ms.channel_bose_max(identity_channel(2), MZ)
    assert r.value == pytest.approx(1)
    assert abs(np.vdot([0, 1], r.certificate)) == pytest.approx(1)
    paulis = [I2, X, 1j * X @ Z, Z]
    depol = from_kraus([p / 2 for p in paulis])
    assert np.allclose(apply(depol, dm([1, 0])), I2 / 2)
    assert ms.channel_bose_max(depol, MZ).value == pytest.approx(0.5)
    reset = from_kraus([np.outer([1, 0], [1, 0]), np.outer([1, 0], [0, 1])])
    assert ms.channel_bose_max(reset, MZ).value == pytest.approx(0, abs=1e-12)


def test_channel_bose_dominates_haar_samples():
    rng = make_rng(3)
    u = haar_random_unitary(8, rng)
    from symkit.channels import from_isometry
    ch = from_isometry(u[:, :2], 4)
    rep = c2_from_unitary(np.kron(-Z, I2))
    res = ms.channel_bose_max(ch, rep)
    pi = projector(rep)
    vals = [np.trace(pi @ apply(ch, dm(haar_random_state(2, rng).amplitudes))).real for _ in range(10_000)]
    assert max(vals) <= res.value + 1e-9
    cert = res.certificate
    assert np.trace(pi @ apply(ch, dm(cert))).real == pytest.approx(res.value, abs=1e-10)


def test_td_examples():
    rep = shift_rep(2)
    sym = I2 / 2
    assert ms.twirl_td(sym, rep) == pytest.approx(0, abs=1e-12)
    assert ms.min_td_sym(sym, rep).value == pytest.approx(0, abs=1e-7)
    # 1/2 || |0><0| - I/2 ||_1 = 1/2
    assert 0.5 * trace_norm(dm([1, 0]) - I2 / 2) == pytest.approx(0.5)
    assert ms.twirl_td(dm([1, 0]), rep) == pytest.approx(0.5)
    r = ms.min_td_sym(dm([1, 0]), rep)
    assert r.gap <= 1e-6 and r.certificate is not None


def test_td_sandwich_and_fidelity_chain():
    rng = make_rng(12)
    for _ in range(20):
        rep = random_rep(rng)
        rho = random_density(rep.dim, rng)
        lo = ms.min_td_sym(rho, rep).value
        mid = ms.twirl_td(rho, rep)
        assert lo - 1e-7 <= mid <= 2 * lo + 1e-7
        fmax = ms.max_fid_sym(rho, rep).value
        ftw = ms.twirl_fid(rho, rep)
        assert ftw <= fmax + 1e-7
        assert np.sqrt(max(0, 1 - ftw)) <= 2 * np.sqrt(max(0, 1 - fmax)) + 1e-7


def test_fid_examples():
    rep = shift_rep(2)
    assert ms.max_fid_sym(I2 / 2, rep).value == pytest.approx(1, abs=1e-7)
    assert ms.twirl_fid(I2 / 2, rep) == pytest.approx(1, abs=1e-12)
    assert ms.twirl_fid(dm([1, 0]), rep) == pytest.approx(0.5)
    # every sigma commuting with X is diagonal in |+>, |->, so F(|0><0|, sigma) = <0|sigma|0> = 1/2
    assert ms.max_fid_sym(dm([1, 0]), rep).value == pytest.approx(0.5, abs=1e-7)


def test_min_td_zero_iff_twirl_td_zero():
    rng = make_rng(5)
    rep = random_rep(rng)
    sym = twirl(rep, random_density(rep.dim, rng))
    assert ms.min_td_sym(sym, rep).value <= 1e-7
    assert ms.twirl_td(sym, rep) <= 1e-8


def test_bse_examples():
    rho = random_density(2, 1)
    assert ms.bse_fidelity(rho, trivial_rep(4)).value == pytest.approx(1, abs=1e-7)
    r = ms.bse_fidelity(I2 / 2, swap_rep(2))
    assert r.value == pytest.approx(1, abs=1e-6)
    assert r.gap <= 1e-6


def test_bse_seesaw_below_sdp():
    rng = make_rng(9)
    for _ in range(5):
        rho = random_density(2, rng)
        rep = c2_from_unitary(np.kron(np.eye(2), np.eye(2)) - 2 * dm(haar_random_state(4, rng).amplitudes))
        r = ms.bse_fidelity(rho, rep, restarts=10, seed=1)
        assert r.lower <= r.upper + 1e-8
        assert r.upper - r.value <= 1e-6


def test_sep_ext_examples():
    rng = make_rng(4)
    rho = random_density(2, rng)
    assert ms.sep_ext_bose(rho, trivial_rep(4)).value == pytest.approx(1, abs=1e-9)
    # plant phi ⊗ rho_S with Pi = |phi><phi| ⊗ I_S
    phi = haar_random_state(2, rng).amplitudes
    rep = c2_from_unitary(np.kron(2 * dm(phi) - I2, I2))
    assert ms.sep_ext_bose(rho, rep).value == pytest.approx(1, abs=1e-6)
    for _ in range(3):
        v = np.eye(4) - 2 * dm(haar_random_state(4, rng).amplitudes)
        res = ms.sep_ext_bose(rho, c2_from_unitary(v), restarts=10, seed=2)
        assert res.value <= ms.bse_fidelity(rho, c2_from_unitary(v), seesaw=False).value + 1e-8


def test_channel_bse_examples():
    assert ms.channel_bse(identity_channel(2), trivial_rep(2)).value == pytest.approx(1, abs=1e-7)
    # replace-with-sigma channel on a qubit input
    sigma = random_density(2, 6)
    from symkit.channels import purify
    psi = purify(sigma, ref_dim=2).amplitudes.reshape(2, 2)
    kraus = [np.outer(psi[k], np.eye(2)[j]) for k in range(2) for j in range(2)]
    const = from_kraus(kraus)
    assert np.allclose(apply(const, dm([0, 1])), sigma)
    rep = c2_from_unitary(np.eye(4) - 2 * dm(haar_random_state(4, make_rng(7)).amplitudes))
    assert ms.channel_bse(const, rep).value == pytest.approx(ms.bse_fidelity(sigma, rep, seesaw=False).value, abs=1e-6)


def test_ham_examples():
    rep = c2_from_unitary(Z)
    for t in np.linspace(0, 3, 5):
        assert ms.ham_max_spec(Z, t, rep).value == pytest.approx(0, abs=1e-12)
        assert ms.ham_avg_spec(Z, t, rep).value == pytest.approx(0, abs=1e-12)
    h = random_hermitian(2, make_rng(1))
    assert ms.ham_max_spec(h, 0.0, shift_rep(2)).value == pytest.approx(0, abs=1e-12)
    # [X, -iZ] = -i(XZ - ZX) = 2Y up to phase, spectral norm 2
    oracle = np.linalg.norm(X @ (-1j * Z) - (-1j * Z) @ X, 2) ** 2
    assert oracle == pytest.approx(4)
    r = ms.ham_max_spec(Z, np.pi / 2, shift_rep(2))
    assert r.value == pytest.approx(4, abs=1e-12) and r.argmax_g == 1
    assert ms.ham_avg_spec(Z, np.pi / 2, shift_rep(2)).value == pytest.approx(2, abs=1e-12)
    with pytest.raises(NotHermitian):
        ms.ham_max_spec(np.array([[0, 1], [0, 0]]), 1.0, shift_rep(2))


def test_ham_argmax_tie_smallest_index():
    # shift rep on C^4: elements 1 and 3 give equal norms for H diagonal
    h = np.diag([0.0, 1.0, 2.0, 3.0])
    r = ms.ham_max_spec(h, 0.7, shift_rep(4))
    norms = [np.linalg.norm(commutator(u, np.diag(np.exp(-0.7j * np.diag(h)))), 2) ** 2 for u in shift_rep(4)]
    best = max(norms)
    assert r.argmax_g == min(i for i, n in enumerate(norms) if n >= best - 1e-12)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_closed_form_invariants(seed):
    rng = make_rng(seed)
    rep = random_rep(rng)
    rho = random_density(rep.dim, rng)
    hs = ms.hs_asymmetry(rho, rep)
    assert hs.value <= ms.gamma_bound(rep.order) + 1e-9
    assert abs(hs.value - ms.hs_asymmetry_direct(rho, rep)) <= 1e-9
    b = ms.bose_symmetry(rho, rep).value
    assert -1e-12 <= b <= 1 + 1e-12
    h = random_hermitian(rep.dim, rng)
    t = float(rng.uniform(0, 4))
    mx, av = ms.ham_max_spec(h, t, rep).value, ms.ham_avg_spec(h, t, rep).value
    assert mx >= av - 1e-12 and av >= 0 and mx <= 4 + 1e-12


def test_faithfulness_pairs():
    rng = make_rng(8)
    u = haar_random_unitary(4, rng)
    rep = c2_from_unitary(u @ np.diag([1.0, 1.0, -1.0, 1.0]) @ u.conj().T)
    pi = projector(rep)
    inside = pi @ random_density(rep.dim, rng) @ pi
    inside /= np.trace(inside).real
    assert ms.bose_symmetry(inside, rep).value == pytest.approx(1, abs=1e-12)
    assert trace_norm(pi @ inside @ pi - inside) <= 1e-8
    generic = random_density(rep.dim, rng)
    assert ms.bose_symmetry(generic, rep).value < 1 - 1e-6
    assert trace_norm(pi @ generic @ pi - generic) > 1e-8
    sym = twirl(rep, generic)
    assert ms.hs_asymmetry(sym, rep).value <= 1e-12
    assert max(hs_norm(commutator(u, sym)) for u in rep) <= 1e-8
    assert ms.hs_asymmetry(generic, rep).value > 1e-6
    assert max(hs_norm(commutator(u, generic)) for u in rep) > 1e-8
