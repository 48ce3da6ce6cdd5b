import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from symkit.channels import (EBChannel, QuantumChannel, adjoint_apply, apply, channel_from_json, channel_to_json,
                             eb_apply, eb_extend, from_isometry, from_kraus, identity_channel, purify)
from symkit.errors import NotHermitian, NotUnitary, ShapeError
from symkit.numerics import partial_trace
from symkit.optimize.haar import haar_random_state, haar_random_unitary, make_rng, random_density

from conftest import I2, X, Z, dm, ket, random_hermitian

seeds = st.integers(0, 2**32 - 1)
CX = np.eye(4)[[0, 1, 3, 2]].astype(complex)


def dephasing():
    return QuantumChannel(CX, 2, 2)


def random_channel(rng, d_in=None, d_out=None, env=None):
    d_in = d_in or int(rng.integers(2, 4))
    d_out = d_out or int(rng.integers(2, 4))
    env = env or int(rng.integers(1, 4))
    while d_out * env < d_in:
        env += 1
    v = haar_random_unitary(d_out * env, rng)[:, :d_in]
    return from_isometry(v, d_out)


def test_apply_examples():
    rho = random_density(3, 1)
    assert np.allclose(apply(identity_channel(3), rho), rho)
    out = apply(dephasing(), dm(ket(1, 1j)))
    assert np.allclose(out, I2 / 2)
    assert np.trace(apply(random_channel(make_rng(0), 3), np.eye(3) / 3)).real == pytest.approx(1)
    with pytest.raises(ShapeError):
        apply(dephasing(), np.eye(3) / 3)


def test_adjoint_examples():
    m = random_hermitian(3, make_rng(2))
    assert np.allclose(adjoint_apply(identity_channel(3), m), m)
    ch = random_channel(make_rng(4))
    assert np.allclose(adjoint_apply(ch, np.eye(ch.out_dim)), np.eye(ch.in_dim))
    # Kraus-sum oracle sum K^dagger X K for the dephasing channel: |0><0| X |0><0| + |1><1| X |1><1| = 0
    assert np.allclose(adjoint_apply(dephasing(), X), 0)
    with pytest.raises(NotHermitian):
        adjoint_apply(dephasing(), np.array([[0, 1], [0, 0]]))


def test_dilation_must_be_unitary():
    with pytest.raises(NotUnitary):
        QuantumChannel(np.diag([1.0, 2.0]), 2, 2)
    with pytest.raises(ShapeError):
        QuantumChannel(np.eye(4), 3, 2)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_trace_preserving_and_positive(seed):
    rng = make_rng(seed)
    ch = random_channel(rng)
    out = apply(ch, random_density(ch.in_dim, rng))
    assert abs(np.trace(out).real - 1) <= 1e-10
    assert np.linalg.eigvalsh(out)[0] >= -1e-9


def test_adjoint_duality_fifty_pairs():
    rng = make_rng(11)
    for _ in range(50):
        ch = random_channel(rng)
        m = random_hermitian(ch.out_dim, rng)
        rho = random_density(ch.in_dim, rng)
        lhs = np.trace(adjoint_apply(ch, m) @ rho)
        rhs = np.trace(m @ apply(ch, rho))
        assert abs(lhs - rhs) <= 1e-9


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_choi_psd_and_normalized(seed):
    ch = random_channel(make_rng(seed))
    c = ch.choi
    assert np.linalg.eigvalsh(c)[0] >= -1e-9
    assert np.allclose(partial_trace(c, [ch.in_dim, ch.out_dim], [0]), np.eye(ch.in_dim), atol=1e-8)
    # Kraus view reproduces the dilation
    rho = random_density(ch.in_dim, make_rng(seed + 1))
    assert np.allclose(sum(k @ rho @ k.conj().T for k in ch.kraus), apply(ch, rho))
    assert np.allclose(apply(from_kraus(ch.kraus), rho), apply(ch, rho))


def test_eb_examples():
    psi = haar_random_state(6, make_rng(3)).amplitudes  # S' (dim 2) ⊗ S (dim 3)
    eb = EBChannel([np.eye(2)], [ket(1, 0)])
    rho_s = partial_trace(psi, [2, 3], [1])
    assert np.allclose(eb_extend(eb, psi), np.kron(dm([1, 0]), rho_s))
    bell = ket(1, 0, 0, 1)
    phis = [ket(1, 1), ket(1, -1j)]
    basis = EBChannel([dm([1, 0]), dm([0, 1])], phis)
    expect = 0.5 * sum(np.kron(dm(p), dm(np.eye(2)[x])) for x, p in enumerate(phis))
    assert np.allclose(eb_extend(basis, bell), expect)
    assert np.allclose(eb_apply(basis, I2 / 2), 0.5 * (dm(phis[0]) + dm(phis[1])))


def test_eb_rejects_bad_povm():
    with pytest.raises(ShapeError):
        EBChannel([dm([1, 0])], [ket(1, 0)])
    with pytest.raises(ShapeError):
        EBChannel([np.diag([1.5, 1.0]), np.diag([-0.5, 0.0])], [ket(1, 0), ket(0, 1)])


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_eb_extend_is_an_extension(seed):
    rng = make_rng(seed)
    d_sp, d_s, d_r, n = 2, int(rng.integers(2, 4)), int(rng.integers(2, 4)), int(rng.integers(1, 5))
    # POVM from the blocks of an isometry C^2 -> C^n ⊗ C^2
    u = haar_random_unitary(n * d_sp, rng)[:, :d_sp]
    blocks = u.reshape(n, d_sp, d_sp)
    mus = [b.conj().T @ b for b in blocks]
    phis = [haar_random_state(d_r, rng).amplitudes for _ in range(n)]
    psi = haar_random_state(d_sp * d_s, rng).amplitudes
    omega = eb_extend(EBChannel(mus, phis), psi)
    assert np.allclose(np.trace(omega), 1)
    assert np.allclose(partial_trace(omega, [d_r, d_s], [1]), partial_trace(psi, [d_sp, d_s], [1]), atol=1e-10)


def test_purify_examples():
    p = purify(dm(ket(1, 1j)))
    assert p.subsystem_dims == (1, 2)
    # maximally entangled: both marginals are I/2
    b = purify(I2 / 2).amplitudes
    assert np.allclose(partial_trace(b, [2, 2], [0]), I2 / 2)
    assert np.allclose(partial_trace(b, [2, 2], [1]), I2 / 2)
    rho = random_density(3, 7)
    s = purify(rho)
    assert np.allclose(partial_trace(s.amplitudes, s.subsystem_dims, [1]), rho, atol=1e-10)
    with pytest.raises(ShapeError):
        purify(np.eye(3) / 3, ref_dim=2)


def test_json_round_trip():
    ch = random_channel(make_rng(8))
    back = channel_from_json(channel_to_json(ch))
    assert np.array_equal(back.dilation, ch.dilation)
    assert (back.in_dim, back.out_dim) == (ch.in_dim, ch.out_dim)
