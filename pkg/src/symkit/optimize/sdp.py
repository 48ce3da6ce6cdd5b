"""Dense complex semidefinite programs with equality constraints.

Primal:  maximize Tr[C X]  s.t.  Tr[A_i X] = b_i,  X ⪰ 0
Dual:    minimize b.y      s.t.  S = sum_i y_i A_i - C ⪰ 0

X, C, A_i and S are block diagonal Hermitian matrices. The solver is an
infeasible-start primal-dual interior-point method with the HKM search
direction and a Mehrotra predictor-corrector step, carried out natively in
complex arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
import scipy.linalg as sla

from ..errors import DimensionCap, Infeasible, NotHermitian, ShapeError, SolverFail

MAX_PSD_DIM = 64
MAX_ITER = 5000
TOL = 1e-10
# accepted when progress stalls; still well inside the 1e-6 contract
TOL_STALL = 1e-7


def hermitian_basis(d: int) -> np.ndarray:
    """Orthonormal basis (under Tr[A^dagger B]) of d x d Hermitian matrices, shape (d*d, d, d)."""
    out = np.zeros((d * d, d, d), dtype=complex)
    k = 0
    for j in range(d):
        out[k, j, j] = 1.0
        k += 1
    s = 1 / np.sqrt(2)
    for j in range(d):
        for l in range(j + 1, d):
            out[k, j, l] = out[k, l, j] = s
            k += 1
            out[k, j, l] = -1j * s
            out[k, l, j] = 1j * s
            k += 1
    return out


class SDPProblem:
    """Builder for a block-diagonal SDP in the primal form above."""

    def __init__(self, block_dims: Sequence[int]):
        self.block_dims = [int(n) for n in block_dims]
        if any(n < 1 for n in self.block_dims):
            raise ShapeError("block dimensions must be positive")
        if sum(self.block_dims) > MAX_PSD_DIM:
            raise DimensionCap(f"total PSD dimension {sum(self.block_dims)} exceeds {MAX_PSD_DIM}")
        self.offsets = np.concatenate([[0], np.cumsum([n * n for n in self.block_dims])]).astype(int)
        self.objective = [np.zeros((n, n), dtype=complex) for n in self.block_dims]
        self._rows: list[np.ndarray] = []
        self._rhs: list[np.ndarray] = []

    @property
    def psd_dim(self) -> int:
        return sum(self.block_dims)

    @property
    def num_constraints(self) -> int:
        return int(sum(r.shape[0] for r in self._rows))

    def _herm(self, block: int, m, batch: bool) -> np.ndarray:
        n = self.block_dims[block]
        m = np.asarray(m, dtype=complex)
        shape = m.shape[-2:]
        if shape != (n, n):
            raise ShapeError(f"block {block} has dimension {n}, got matrix of shape {shape}")
        dev = np.max(np.abs(m - np.conj(np.swapaxes(m, -1, -2))), initial=0.0)
        if dev > 1e-9 * max(1.0, np.max(np.abs(m), initial=0.0)):
            raise NotHermitian(f"SDP data for block {block} is not Hermitian (deviation {dev:.2e})")
        return (m + np.conj(np.swapaxes(m, -1, -2))) / 2

    def set_objective(self, block: int, c) -> SDPProblem:
        self.objective[block] = self._herm(block, c, False)
        return self

    def add_constraint(self, terms: Mapping[int, np.ndarray], rhs: float) -> SDPProblem:
        """Tr[sum_k A_k X_k] = rhs, with ``terms`` mapping block index to A_k."""
        return self.add_constraints({k: np.asarray(a)[None] for k, a in terms.items()}, [rhs])

    def add_constraints(self, terms: Mapping[int, np.ndarray], rhs) -> SDPProblem:
        """A batch of m constraints; each value in ``terms`` has shape (m, n_k, n_k)."""
        rhs = np.asarray(rhs, dtype=float).reshape(-1)
        m = rhs.size
        row = np.zeros((m, self.offsets[-1]), dtype=complex)
        for k, a in terms.items():
            a = self._herm(k, a, True)
            if a.shape[0] != m:
                raise ShapeError("constraint batch size does not match rhs length")
            row[:, self.offsets[k]:self.offsets[k + 1]] = a.reshape(m, -1)
        self._rows.append(row)
        self._rhs.append(rhs)
        return self

    def matrices(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        a = np.concatenate(self._rows) if self._rows else np.zeros((0, self.offsets[-1]), dtype=complex)
        b = np.concatenate(self._rhs) if self._rhs else np.zeros(0)
        c = np.concatenate([m.reshape(-1) for m in self.objective])
        return a, b, c


@dataclass
class SDPSolution:
    primal_value: float
    dual_value: float
    X: list
    y: np.ndarray
    S: list
    gap: float
    iterations: int
    residual: float = 0.0
    status: str = "optimal"
    history: list = field(default_factory=list, repr=False)

    @property
    def value(self) -> float:
        return self.primal_value


def _reduce_constraints(a: np.ndarray, b: np.ndarray):
    """Drop linearly dependent constraints; raise Infeasible if they are inconsistent."""
    if a.shape[0] == 0:
        return np.arange(0), a, b
    real = np.concatenate([a.real, a.imag], axis=1)
    scale = np.linalg.norm(real, axis=1)
    scale[scale == 0] = 1.0
    rs = real / scale[:, None]
    bs = b / scale
    _, r, piv = sla.qr(rs.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    tol = max(rs.shape) * np.finfo(float).eps * (diag[0] if diag.size else 1.0) * 100
    rank = int(np.sum(diag > tol))
    keep = np.sort(piv[:rank])
    # consistency: b must equal A x for some x
    x, *_ = np.linalg.lstsq(rs, bs, rcond=None)
    resid = rs @ x - bs
    if np.linalg.norm(resid) > 1e-8 * (1 + np.linalg.norm(bs)):
        # the least-squares residual y has y^T A = 0 and y^T b = -|y|^2
        raise Infeasible("equality constraints are inconsistent", certificate=resid / scale)
    return keep, a[keep], b[keep]


class _Blocks:
    """Helpers for block-diagonal matrices stored as a list of dense blocks."""

    def __init__(self, dims, offsets):
        self.dims = dims
        self.offsets = offsets

    def split(self, flat):
        return [flat[self.offsets[k]:self.offsets[k + 1]].reshape(n, n) for k, n in enumerate(self.dims)]

    @staticmethod
    def flat(blocks):
        return np.concatenate([m.reshape(-1) for m in blocks])


def _herm(m):
    return (m + m.conj().T) / 2


def _max_step(x_blocks, dx_blocks):
    """Largest alpha with X + alpha dX ⪰ 0 (inf if dX keeps X PSD)."""
    alpha = np.inf
    for x, dx in zip(x_blocks, dx_blocks):
        try:
            l = np.linalg.cholesky(x)
        except np.linalg.LinAlgError:
            return 0.0
        li = sla.solve_triangular(l, np.eye(l.shape[0]), lower=True)
        m = li @ dx @ li.conj().T
        lam = np.linalg.eigvalsh(_herm(m))[0]
        if lam < 0:
            alpha = min(alpha, -1.0 / lam)
    return alpha


def _is_pd(blocks) -> bool:
    try:
        for b in blocks:
            np.linalg.cholesky(b)
    except np.linalg.LinAlgError:
        return False
    return True


def _backtrack(x, dx, alpha, return_step=False):
    """X + alpha dX, shrinking alpha until every block is numerically positive definite."""
    for _ in range(30):
        cand = [_herm(x[k] + alpha * dx[k]) for k in range(len(x))]
        if _is_pd(cand):
            return (cand, alpha) if return_step else cand
        alpha *= 0.7
    return (None, 0.0) if return_step else None


def _step(x, s, y, rd, rp, a_blocks, op_a, op_at, dims, m, n_tot, mu_gap):
    """One Mehrotra predictor-corrector step; returns the new (X, S, y) or None."""
    s_inv = [np.linalg.inv(sk) for sk in s]
    # Schur complement M_ij = Re Tr[A_i X A_j S^-1]
    schur = np.zeros((m, m))
    for k in range(len(dims)):
        ab = a_blocks[k]
        bj = x[k][None] @ ab @ s_inv[k][None]
        schur += np.real(np.conj(ab.reshape(m, -1)) @ bj.reshape(m, -1).T)
    schur = (schur + schur.T) / 2
    try:
        cho = sla.cho_factor(schur + 1e-15 * np.trace(schur) / max(m, 1) * np.eye(m))
        solve = lambda r: sla.cho_solve(cho, r)
    except (np.linalg.LinAlgError, ValueError):
        solve = lambda r: np.linalg.lstsq(schur, r, rcond=None)[0]

    def direction(mu, corr):
        # rhs of M dy = A(mu S^-1 - X - sym(corr S^-1) + sym(X Rd S^-1)) - rp
        g = []
        for k in range(len(dims)):
            t = mu * s_inv[k] - x[k] + _herm(x[k] @ rd[k] @ s_inv[k])
            if corr is not None:
                t = t - _herm(corr[k] @ s_inv[k])
            g.append(t)
        rhs = op_a(g) - rp
        dy = solve(rhs) if m else np.zeros(0)
        atdy = op_at(dy)
        ds = [atdy[k] - rd[k] for k in range(len(dims))]
        dx = []
        for k in range(len(dims)):
            t = mu * s_inv[k] - x[k] - _herm(x[k] @ ds[k] @ s_inv[k])
            if corr is not None:
                t = t - _herm(corr[k] @ s_inv[k])
            dx.append(_herm(t))
        return dx, dy, ds

    dx_a, dy_a, ds_a = direction(0.0, None)
    ap = min(1.0, _max_step(x, dx_a))
    ad = min(1.0, _max_step(s, ds_a))
    mu = mu_gap / n_tot
    mu_aff = sum(float(np.real(np.trace((x[k] + ap * dx_a[k]) @ (s[k] + ad * ds_a[k]))))
                 for k in range(len(dims))) / n_tot
    sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3)) if mu > 0 else 0.0
    corr = [dx_a[k] @ ds_a[k] for k in range(len(dims))]
    dx, dy, ds = direction(sigma * mu, corr)
    ap = min(1.0, 0.98 * _max_step(x, dx))
    ad = min(1.0, 0.98 * _max_step(s, ds))
    if ap < 1e-12 and ad < 1e-12:
        return None
    x_new = _backtrack(x, dx, ap)
    s_new, ad = _backtrack(s, ds, ad, return_step=True)
    if x_new is None or s_new is None:
        return None
    return x_new, s_new, y + ad * dy


def sdp_solve(p: SDPProblem, tol: float = TOL, max_iter: int = MAX_ITER, verbose: bool = False) -> SDPSolution:
    """Solve the SDP to relative gap and infeasibility ``tol``.

    Raises Infeasible for inconsistent equality systems and for primal
    infeasibility detected through an unbounded dual ray; raises SolverFail
    when the iteration cap is hit or progress stalls before reaching 1e-7.
    """
    a_all, b_all, c_flat = p.matrices()
    keep, a, b = _reduce_constraints(a_all, b_all)
    blk = _Blocks(p.block_dims, p.offsets)
    dims = p.block_dims
    n_tot = sum(dims)
    m = a.shape[0]
    a_blocks = [a[:, p.offsets[k]:p.offsets[k + 1]].reshape(m, n, n) for k, n in enumerate(dims)]
    a_conj = np.conj(a)
    c_blocks = blk.split(c_flat)

    def op_a(xb):  # A(X)
        return np.real(a_conj @ blk.flat(xb))

    def op_at(y):  # A*(y)
        return blk.split(a.T @ y.astype(complex))

    norm_b = np.linalg.norm(b)
    norm_c = np.linalg.norm(c_flat)
    a_norms = np.linalg.norm(a, axis=1) if m else np.zeros(0)
    zeta = max(10.0, np.sqrt(n_tot), n_tot * np.max((1 + np.abs(b)) / (1 + a_norms), initial=1.0))
    eta = max(10.0, np.sqrt(n_tot), np.max(a_norms, initial=0.0), norm_c)
    x = [zeta * np.eye(n, dtype=complex) for n in dims]
    s = [eta * np.eye(n, dtype=complex) for n in dims]
    y = np.zeros(m)

    history = []
    best = None
    stall = 0
    for it in range(1, max_iter + 1):
        pobj = float(np.real(np.vdot(c_flat, blk.flat(x))))
        dobj = float(b @ y)
        rp = b - op_a(x)
        aty = op_at(y)
        rd = [c_blocks[k] - aty[k] + s[k] for k in range(len(dims))]
        mu_gap = sum(float(np.real(np.trace(xk @ sk))) for xk, sk in zip(x, s))
        pinf = np.linalg.norm(rp) / (1 + norm_b)
        dinf = np.linalg.norm(blk.flat(rd)) / (1 + norm_c)
        relgap = abs(pobj - dobj) / (1 + abs(pobj) + abs(dobj))
        compl = mu_gap / (1 + abs(pobj) + abs(dobj))
        err = max(pinf, dinf, relgap, compl)
        history.append((pobj, dobj, pinf, dinf, relgap))
        if verbose:
            print(f"{it:4d} p={pobj:.12g} d={dobj:.12g} pinf={pinf:.1e} dinf={dinf:.1e} gap={relgap:.1e}")
        if best is None or err < best[0]:
            best = (err, [xk.copy() for xk in x], y.copy(), [sk.copy() for sk in s], it)
            stall = 0
        else:
            stall += 1
        if err <= tol:
            break
        # dual ray: S stays PSD while b.y diverges to -inf
        if m and np.linalg.norm(y) > 1e9 * (1 + norm_c) and dobj < 0:
            ray = y / np.linalg.norm(y)
            aty_r = op_at(ray)
            if all(np.linalg.eigvalsh(_herm(q))[0] > -1e-8 for q in aty_r) and b @ ray < -1e-10:
                full = np.zeros(a_all.shape[0])
                full[keep] = ray
                raise Infeasible("primal problem is infeasible", certificate=full)
        if stall > 30:
            break

        # iterates far worse than the best one mean the Schur system lost accuracy
        if err > 1e3 * best[0] and best[0] <= TOL_STALL:
            break
        try:
            step = _step(x, s, y, rd, rp, a_blocks, op_a, op_at, dims, m, n_tot, mu_gap)
        except np.linalg.LinAlgError:
            break
        if step is None:
            break
        x, s, y = step
    else:
        it = max_iter

    err, x, y, s, it_best = best
    if err > TOL_STALL:
        if it >= max_iter:
            raise SolverFail(f"SDP solver hit the iteration cap ({max_iter}) with error {err:.2e}")
        raise SolverFail(f"SDP solver stalled with error {err:.2e}")
    pobj = float(np.real(np.vdot(c_flat, blk.flat(x))))
    dobj = float(b @ y)
    y_full = np.zeros(a_all.shape[0])
    y_full[keep] = y
    resid = float(np.linalg.norm(b - op_a(x)))
    return SDPSolution(pobj, dobj, x, y_full, s, abs(dobj - pobj), it, resid,
                       "optimal" if err <= tol else "near_optimal", history)


def lambda_max_sdp(c: np.ndarray) -> SDPSolution:
    """max Tr[C X] over density matrices; equals the top eigenvalue of C."""
    n = c.shape[0]
    p = SDPProblem([n]).set_objective(0, c)
    p.add_constraint({0: np.eye(n)}, 1.0)
    return sdp_solve(p)
