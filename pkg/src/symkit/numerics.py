"""Dense complex linear algebra kernels and distance measures between states.

Operators are plain ``numpy.ndarray`` objects. :class:`DensityMatrix` and
:class:`PureState` add validation and subsystem bookkeeping, and both expose
``__array__`` so they can be handed to any function that accepts arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionCap, NotHermitian, ShapeError

TOL_HERM = 1e-9
TOL_PSD = 1e-9
TOL_TRACE = 1e-9
TOL_NORM = 1e-9
TOL_FID = 1e-9
DIM_CAP = 4096


def tol_unitary(dim: int) -> float:
    return 1e-9 * max(1, dim)


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def is_hermitian(m: np.ndarray, tol: float = TOL_HERM) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.max(np.abs(m - dagger(m)), initial=0.0) <= tol


def is_unitary(m: np.ndarray, tol: float | None = None) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    tol = tol_unitary(m.shape[0]) if tol is None else tol
    return np.linalg.norm(dagger(m) @ m - np.eye(m.shape[0])) <= tol


def _check_square(m: np.ndarray, name: str = "matrix") -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ShapeError(f"{name} has non-finite entries")
    return m


def _check_hermitian(m: np.ndarray, name: str = "matrix") -> np.ndarray:
    m = _check_square(m, name)
    if not is_hermitian(m):
        err = np.max(np.abs(m - dagger(m)))
        raise NotHermitian(f"{name} is not Hermitian (max deviation {err:.3e})")
    return m


def basis_vector(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector(vec: np.ndarray) -> np.ndarray:
    vec = np.asarray(vec, dtype=complex).reshape(-1)
    return np.outer(vec, vec.conj())


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized state vector with declared subsystem dimensions."""

    amplitudes: np.ndarray
    subsystem_dims: tuple[int, ...] = ()

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        dims = tuple(int(d) for d in self.subsystem_dims) or (amps.size,)
        if int(np.prod(dims)) != amps.size:
            raise ShapeError(f"subsystem dims {dims} do not multiply to {amps.size}")
        if abs(np.linalg.norm(amps) - 1.0) > TOL_NORM:
            raise ShapeError(f"state vector norm {np.linalg.norm(amps):.12g} is not 1")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "subsystem_dims", dims)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def density(self) -> "DensityMatrix":
        return DensityMatrix(projector(self.amplitudes), self.subsystem_dims)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.amplitudes, dtype=dtype)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """PSD, unit-trace matrix with declared subsystem dimensions."""

    matrix: np.ndarray
    subsystem_dims: tuple[int, ...] = ()

    def __post_init__(self):
        m = _check_square(self.matrix, "density matrix")
        dims = tuple(int(d) for d in self.subsystem_dims) or (m.shape[0],)
        if int(np.prod(dims)) != m.shape[0]:
            raise ShapeError(f"subsystem dims {dims} do not multiply to {m.shape[0]}")
        if not is_hermitian(m, TOL_HERM):
            raise NotHermitian("density matrix is not Hermitian")
        if abs(np.trace(m).real - 1.0) > TOL_TRACE:
            raise ShapeError(f"density matrix trace {np.trace(m).real:.12g} is not 1")
        lam_min = np.linalg.eigvalsh(m)[0]
        if lam_min < -TOL_PSD:
            raise ShapeError(f"density matrix has negative eigenvalue {lam_min:.3e}")
        m = np.array(m)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "subsystem_dims", dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


def as_operator(x) -> np.ndarray:
    """Return a square complex array; vectors are turned into projectors."""
    if isinstance(x, PureState):
        return projector(x.amplitudes)
    arr = np.asarray(x, dtype=complex)
    if arr.ndim == 1:
        return projector(arr)
    return _check_square(arr)


def tensor_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with ``a``'s index major. Raises DimensionCap past 4096."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim == 1 and b.ndim == 1:
        if a.size * b.size > DIM_CAP:
            raise DimensionCap(f"tensor product dimension {a.size * b.size} exceeds {DIM_CAP}")
        return np.kron(a, b)
    a2 = np.atleast_2d(a)
    b2 = np.atleast_2d(b)
    rows = a2.shape[0] * b2.shape[0]
    cols = a2.shape[1] * b2.shape[1]
    if rows > DIM_CAP or cols > DIM_CAP:
        raise DimensionCap(f"tensor product shape {rows}x{cols} exceeds {DIM_CAP}")
    return np.kron(a2, b2)


def kron_all(*ops: np.ndarray) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex) if np.asarray(ops[0]).ndim == 2 else np.ones(1, dtype=complex)
    for op in ops:
        out = tensor_product(out, op)
    return out


def partial_trace(m: np.ndarray, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every subsystem not in ``keep``; kept factors stay in ascending order."""
    m = np.asarray(m, dtype=complex)
    if m.ndim == 1:
        m = projector(m)
    dims = [int(d) for d in dims]
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] != int(np.prod(dims)):
        raise ShapeError(f"matrix of shape {m.shape} does not match dims {dims}")
    if not keep or keep[0] < 0 or keep[-1] >= n:
        raise ShapeError(f"keep set {keep} invalid for {n} subsystems")
    if n > 26:
        raise ShapeError("too many subsystems for partial_trace")
    letters = "abcdefghijklmnopqrstuvwxyz"
    upper = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
    row = list(letters[:n])
    col = [upper[i] if i in keep else letters[i] for i in range(n)]
    out = "".join(letters[i] for i in keep) + "".join(upper[i] for i in keep)
    t = m.reshape(dims + dims)
    reduced = np.einsum("".join(row) + "".join(col) + "->" + out, t)
    d_keep = int(np.prod([dims[i] for i in keep]))
    return reduced.reshape(d_keep, d_keep)


def permute_subsystems(m: np.ndarray, dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors of an operator (or vector): new factor k is old factor order[k]."""
    m = np.asarray(m, dtype=complex)
    dims = [int(d) for d in dims]
    n = len(dims)
    if sorted(order) != list(range(n)):
        raise ShapeError(f"order {order} is not a permutation of {n} factors")
    if m.ndim == 1:
        return m.reshape(dims).transpose(order).reshape(-1)
    t = m.reshape(dims + dims).transpose(list(order) + [n + k for k in order])
    return t.reshape(m.shape)


def permutation_matrix(dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Unitary P with P (x_0 ⊗ ... ⊗ x_{n-1}) = x_{order[0]} ⊗ ... ."""
    d = int(np.prod(dims))
    eye = np.eye(d, dtype=complex)
    cols = [permute_subsystems(eye[:, j], dims, order) for j in range(d)]
    return np.stack(cols, axis=1)


def herm_eig(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues in ascending order and unitary eigenvectors of a Hermitian matrix."""
    m = _check_hermitian(m)
    lam, vecs = np.linalg.eigh((m + dagger(m)) / 2)
    return lam, vecs


def expm_hermitian(h: np.ndarray, t: float) -> np.ndarray:
    """``exp(-i h t)`` through the spectral decomposition of ``h``."""
    lam, vecs = herm_eig(h)
    return (vecs * np.exp(-1j * lam * t)) @ dagger(vecs)


def sqrtm_psd(m: np.ndarray) -> np.ndarray:
    # eigenvalues below zero are rounding noise on PSD input
    lam, vecs = herm_eig(m)
    return (vecs * np.sqrt(np.clip(lam, 0.0, None))) @ dagger(vecs)


def singular_values(m: np.ndarray) -> np.ndarray:
    return np.linalg.svd(np.asarray(m, dtype=complex), compute_uv=False)


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity ``||sqrt(rho) sqrt(sigma)||_1^2``.

    Computed as ``(sum_i sqrt(mu_i))^2`` with ``mu_i`` the eigenvalues of
    ``sqrt(rho) sigma sqrt(rho)``; the result is clamped to [0, 1].
    """
    r = as_operator(rho)
    s = as_operator(sigma)
    if r.shape != s.shape:
        raise ShapeError(f"dimension mismatch {r.shape} vs {s.shape}")
    sr = sqrtm_psd(r)
    inner = sr @ s @ sr
    mu = np.linalg.eigvalsh((inner + dagger(inner)) / 2)
    f = float(np.sum(np.sqrt(np.clip(mu, 0.0, None))) ** 2)
    return min(max(f, 0.0), 1.0)


def trace_norm(m: np.ndarray) -> float:
    m = np.asarray(m, dtype=complex)
    if is_hermitian(m, 1e-12):
        return float(np.sum(np.abs(np.linalg.eigvalsh((m + dagger(m)) / 2))))
    return float(np.sum(singular_values(m)))


def trace_distance(rho, sigma) -> float:
    r = as_operator(rho)
    s = as_operator(sigma)
    if r.shape != s.shape:
        raise ShapeError(f"dimension mismatch {r.shape} vs {s.shape}")
    return min(0.5 * trace_norm(r - s), 1.0)


def hs_norm(m: np.ndarray) -> float:
    """Hilbert-Schmidt (Frobenius) norm."""
    return float(np.linalg.norm(np.asarray(m, dtype=complex)))


def spectral_norm(m: np.ndarray) -> float:
    m = np.asarray(m, dtype=complex)
    if m.size == 0:
        return 0.0
    return float(singular_values(m)[0])


def sine_distance(rho, sigma) -> float:
    return float(np.sqrt(max(0.0, 1.0 - fidelity(rho, sigma))))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a
