import time

import numpy as np
import pytest

from symkit.optimize.haar import haar_random_unitary, make_rng

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0]).astype(complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
I2 = np.eye(2, dtype=complex)
SWAP = np.eye(4)[[0, 2, 1, 3]].astype(complex)


def ket(*amps):
    v = np.array(amps, dtype=complex)
    return v / np.linalg.norm(v)


def dm(v):
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


def random_hermitian(d, rng):
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (a + a.conj().T) / 2


@pytest.fixture
def rng():
    return make_rng(20261014)



def random_involution(d, rng):
    u = haar_random_unitary(d, rng)
    signs = np.where(rng.random(d) < 0.5, 1.0, -1.0)
    v = u @ np.diag(signs) @ u.conj().T
    return (v + v.conj().T) / 2


def random_rep(rng, d=None):
    """One of: conjugated cyclic shift, C2 from a random involution, Klein four on two qubits."""
    from symkit.symmetry import c2_from_unitary, shift_rep, validate_rep
    choice = int(rng.integers(3))
    if choice == 0:
        d = d or int(rng.integers(2, 5))
        u = haar_random_unitary(d, rng)
        base = shift_rep(d)
        return validate_rep([u @ g @ u.conj().T for g in base.elements], base.mult_table)
    if choice == 1:
        return c2_from_unitary(random_involution(d or int(rng.integers(2, 5)), rng))
    u = haar_random_unitary(4, rng)
    els = [np.kron(a, b) for a in (I2, X) for b in (I2, X)]
    table = [[i ^ j for j in range(4)] for i in range(4)]
    return validate_rep([u @ g @ u.conj().T for g in els], table)


_T0 = time.perf_counter()


def pytest_terminal_summary(terminalreporter, exitstatus):
    secs = time.perf_counter() - _T0
    ok = exitstatus == 0 and secs <= 300
    terminalreporter.write_line(f"[criterion 11] {'PASS' if ok else 'FAIL'}  full suite green in "
                                f"{secs:.1f} s (budget 300 s)")
