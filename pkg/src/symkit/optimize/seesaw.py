"""Alternating (see-saw) optimizers over prover strategies.

Every objective here is a convex quadratic form ``<phi|K|phi>`` in the prover's
isometry, with ``K`` positive semidefinite. For such an objective the
linearization at the current point is a lower bound, and the isometry that
maximizes the linearization is the polar factor of the gradient. Each update
therefore never decreases the objective; the runs assert this.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..numerics import dagger
from .haar import haar_random_unitary, make_rng

MAX_ITER = 5000
TOL = 1e-13
MONO_SLACK = 1e-11
# restarts stop early once this many runs agree with the best value
AGREE_RUNS = 3
AGREE_TOL = 1e-9


def polar_factor(g: np.ndarray) -> np.ndarray:
    """Isometry maximizing Re Tr[g^dagger V]: U W^dagger from the SVD g = U S W^dagger."""
    u, _, wh = np.linalg.svd(g, full_matrices=False)
    return u @ wh


def random_isometry(d_out: int, d_in: int, rng) -> np.ndarray:
    return haar_random_unitary(d_out, rng)[:, :d_in]


def top_eigvec(m: np.ndarray) -> tuple[float, np.ndarray]:
    lam, vec = np.linalg.eigh((m + dagger(m)) / 2)
    return float(lam[-1]), vec[:, -1]


class _Restarts:
    """Tracks the best run; signals a stop when enough runs land on the best value."""

    def __init__(self):
        self.best = None
        self.values: list[float] = []
        self.total = 0

    def add(self, val, arg, hist) -> bool:
        self.total += len(hist)
        self.values.append(val)
        if self.best is None or val > self.best.value:
            self.best = SeesawResult(val, arg, len(hist), hist)
        if val >= 1 - 1e-14:
            return True
        agree = sum(abs(v - self.best.value) <= AGREE_TOL for v in self.values)
        return agree >= AGREE_RUNS

    def result(self) -> SeesawResult:
        self.best.restarts = len(self.values)
        self.best.iterations = self.total
        return self.best


@dataclass
class SeesawResult:
    value: float
    argument: object
    iterations: int
    history: list = field(default_factory=list, repr=False)
    restarts: int = 1
    converged: bool = True


def _check_monotone(hist: list, new: float):
    if hist and new < hist[-1] - MONO_SLACK * max(1.0, abs(hist[-1])):
        raise AssertionError(f"see-saw objective decreased: {hist[-1]!r} -> {new!r}")
    hist.append(new)


class _ProverObjective:
    """f(V) = <phi|K ⊗ I_E'|phi>, phi[a, e, s] = sum_r V[(a, e), r] Psi[r, s].

    ``K`` acts on R' ⊗ S' (prover output first), ``Psi`` is the input state
    written as a (d_in, d_s) matrix with the prover's input index first.
    """

    def __init__(self, k: np.ndarray, psi: np.ndarray, d_rp: int, d_ep: int):
        self.k = k
        self.psi = psi
        self.d_rp = d_rp
        self.d_ep = d_ep
        self.d_s = psi.shape[1]

    def output(self, v):
        phi = (v @ self.psi).reshape(self.d_rp, self.d_ep, self.d_s)
        return phi

    def apply_k(self, phi):
        t = np.transpose(phi, (0, 2, 1)).reshape(self.d_rp * self.d_s, self.d_ep)
        kt = (self.k @ t).reshape(self.d_rp, self.d_s, self.d_ep)
        return np.transpose(kt, (0, 2, 1))

    def value_grad(self, v):
        phi = self.output(v)
        kphi = self.apply_k(phi)
        val = float(np.real(np.vdot(phi, kphi)))
        grad = kphi.reshape(self.d_rp * self.d_ep, self.d_s) @ dagger(self.psi)
        return val, grad


def prover_ascent(k, psi, d_rp, d_ep, v0, max_iter=MAX_ITER, tol=TOL):
    """Polar-factor ascent from the isometry v0; returns (value, V, history)."""
    obj = _ProverObjective(k, psi, d_rp, d_ep)
    v = v0
    hist: list = []
    val, grad = obj.value_grad(v)
    _check_monotone(hist, val)
    for _ in range(max_iter):
        if np.linalg.norm(grad) < 1e-300:
            break
        v = polar_factor(grad)
        new, grad = obj.value_grad(v)
        _check_monotone(hist, new)
        if new - val <= tol:
            val = new
            break
        val = new
    return val, v, hist


def seesaw_prover(pi: np.ndarray, psi: np.ndarray, d_rp: int, d_ep: int | None = None,
                  restarts: int = 20, seed=0, max_iter: int = MAX_ITER) -> SeesawResult:
    """Maximize ||(Pi ⊗ I_E') (V ⊗ I_S') |psi>||^2 over isometries V: R -> R' ⊗ E'.

    ``psi`` is given as a (d_R, d_S') matrix (prover input index first) and
    ``pi`` acts on R' ⊗ S'. The default ancilla ``d_E' = d_R' * d_S'`` is large
    enough for the maximum to equal the extension SDP value. The best run over
    ``restarts`` random starting isometries is returned.
    """
    psi = np.asarray(psi, dtype=complex)
    d_in, d_s = psi.shape
    d_ep = d_rp * d_s if d_ep is None else d_ep
    while d_rp * d_ep < d_in:
        d_ep += 1
    rng = make_rng(seed)
    runs = _Restarts()
    for _ in range(max(1, restarts)):
        v0 = random_isometry(d_rp * d_ep, d_in, rng)
        val, v, hist = prover_ascent(pi, psi, d_rp, d_ep, v0, max_iter)
        if runs.add(val, v, hist):
            break
    return runs.result()


def eb_seesaw(pi: np.ndarray, psi: np.ndarray, d_r: int, n_outcomes: int | None = None,
              restarts: int = 20, seed=0, max_iter: int = MAX_ITER, tol: float = TOL) -> SeesawResult:
    """Maximize Tr[Pi E(psi)] over entanglement-breaking E: S' -> R applied to psi.

    ``psi`` is a (d_S', d_S) matrix with the sent register first; ``pi`` acts
    on R ⊗ S. The channel is parametrized by a rank-one POVM mu_x = |m_x><m_x|
    (rows of a Naimark isometry M with M^dagger M = I) and pure states phi_x.
    The phi-step is an exact top-eigenvector update; the M-step is the polar
    factor of the gradient of a convex quadratic. The result's argument is
    ``(M, phis)``.
    """
    psi = np.asarray(psi, dtype=complex)
    d_in, d_s = psi.shape
    n = max(d_in, d_s * d_s) if n_outcomes is None else max(n_outcomes, d_in)
    k4 = pi.reshape(d_r, d_s, d_r, d_s)
    rng = make_rng(seed)
    runs = _Restarts()

    def phis_step(vs):
        # L_x = Tr_S[K (I ⊗ v_x v_x^dagger)] on R
        ls = np.einsum("asbt,xs,xt->xab", k4, vs.conj(), vs)
        out = np.empty((n, d_r), dtype=complex)
        val = 0.0
        for x in range(n):
            lam, vec = top_eigvec(ls[x])
            out[x] = vec
            val += lam
        return val, out

    def value(vs, phis):
        q = np.einsum("xa,asbt,xb->xst", phis.conj(), k4, phis)
        return float(np.real(np.einsum("xs,xst,xt->", vs.conj(), q, vs))), q

    for _ in range(max(1, restarts)):
        m = random_isometry(n, d_in, rng)
        vs = m @ psi
        _, phis = phis_step(vs)
        hist: list = []
        val, q = value(vs, phis)
        _check_monotone(hist, val)
        for _ in range(max_iter):
            # M-step: gradient rows K'_x M[x] with K'_x = conj(Psi) Q_x Psi^T
            grad = np.einsum("rs,xst,ut,xu->xr", psi.conj(), q, psi, m)
            m = polar_factor(grad) if np.linalg.norm(grad) > 0 else m
            vs = m @ psi
            val_m, _ = value(vs, phis)
            _check_monotone(hist, val_m)
            val_p, phis = phis_step(vs)
            _check_monotone(hist, val_p)
            new, q = value(vs, phis)
            if new - val <= tol:
                val = new
                break
            val = new
        if runs.add(val, (m, phis), hist):
            break
    return runs.result()


def qip3_nested(pi: np.ndarray, w: np.ndarray, d_sp: int, d_r: int, d_rp: int,
                d_e: int | None = None, d_ep: int | None = None, restarts: int = 50, seed=0,
                max_iter: int = 2000, tol: float = TOL) -> SeesawResult:
    """Optimize both prover messages of a three-message protocol.

    ``w`` is the verifier's isometry R'' -> S' ⊗ R (first verifier unitary with
    its fixed inputs plugged in). The prover sends |psi> on R'' ⊗ E, then applies
    P: R ⊗ E -> R' ⊗ E'. The value is ||(Pi ⊗ I_E') P W |psi>||^2 with ``pi``
    acting on R' ⊗ S'. Alternates an exact eigenvector step for psi with a
    polar step for P. The argument is ``(psi, P)``.
    """
    w = np.asarray(w, dtype=complex)
    d_rpp = w.shape[1]
    if w.shape[0] != d_sp * d_r:
        raise ValueError("isometry output does not match d_S' * d_R")
    d_e = d_rpp if d_e is None else d_e
    d_in = d_r * d_e
    d_ep = d_rp * d_sp if d_ep is None else d_ep
    while d_rp * d_ep < d_in:
        d_ep += 1
    w3 = w.reshape(d_sp, d_r, d_rpp)
    obj_dim = d_rpp * d_e
    rng = make_rng(seed)
    runs = _Restarts()

    def psi_matrix(psi):
        # (W ⊗ I_E)|psi>, written as (R E, S') matrix for the prover step
        p = psi.reshape(d_rpp, d_e)
        chi = np.einsum("srq,qe->res", w3, p)
        return chi.reshape(d_in, d_sp)

    def psi_step(v):
        # A maps R'' E to the output R' E' S'; objective psi^dagger A^dagger K A psi
        v4 = v.reshape(d_rp, d_ep, d_r, d_e)
        a = np.einsum("afre,srq,eg->afsqg", v4, w3, np.eye(d_e)).reshape(d_rp, d_ep, d_sp, obj_dim)
        at = np.transpose(a, (0, 2, 1, 3)).reshape(d_rp * d_sp, d_ep * obj_dim)
        ka = (pi @ at).reshape(d_rp * d_sp * d_ep, obj_dim)
        a_flat = at.reshape(d_rp * d_sp * d_ep, obj_dim)
        m = dagger(a_flat) @ ka
        return top_eigvec(m)

    for _ in range(max(1, restarts)):
        psi = haar_random_unitary(obj_dim, rng)[:, 0]
        v = random_isometry(d_rp * d_ep, d_in, rng)
        hist: list = []
        val = None
        for _ in range(max_iter):
            obj = _ProverObjective(pi, psi_matrix(psi), d_rp, d_ep)
            cur, grad = obj.value_grad(v)
            if val is None:
                _check_monotone(hist, cur)
                val = cur
            v = polar_factor(grad) if np.linalg.norm(grad) > 0 else v
            mid, _ = _ProverObjective(pi, psi_matrix(psi), d_rp, d_ep).value_grad(v)
            _check_monotone(hist, mid)
            new, psi = psi_step(v)
            _check_monotone(hist, new)
            if new - val <= tol:
                val = new
                break
            val = new
        if runs.add(val, (psi, v), hist):
            break
    return runs.result()
