"""Haar-random states and unitaries on a counter-based generator."""

from __future__ import annotations

import numpy as np

from ..numerics import PureState


def make_rng(seed) -> np.random.Generator:
    """Philox generator from an explicit seed; a Generator passes through unchanged."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(seed))


def haar_random_state(dim: int, seed=None) -> PureState:
    rng = make_rng(seed)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return PureState(v / np.linalg.norm(v))


def haar_random_unitary(dim: int, seed=None) -> np.ndarray:
    # QR of a Ginibre matrix with the phase fix that makes the law Haar
    rng = make_rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_density(dim: int, seed=None, rank: int | None = None) -> np.ndarray:
    """Density matrix from the induced measure: Tr_E of a Haar state on dim x rank."""
    rng = make_rng(seed)
    k = dim if rank is None else rank
    g = rng.standard_normal((dim, k)) + 1j * rng.standard_normal((dim, k))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real
