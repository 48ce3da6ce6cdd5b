"""Quantum channels stored as unitary dilations, plus entanglement-breaking channels."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import NotUnitary, ShapeError
from .numerics import (
    PureState,
    _check_hermitian,
    _check_square,
    as_operator,
    dagger,
    partial_trace,
    tol_unitary,
)


def complete_isometry(v: np.ndarray) -> np.ndarray:
    """Unitary whose first columns are the isometry ``v``."""
    d, k = v.shape
    rng = np.random.default_rng(0)
    filler = rng.standard_normal((d, d - k)) + 1j * rng.standard_normal((d, d - k))
    filler -= v @ (dagger(v) @ filler)
    q, _ = np.linalg.qr(filler)
    return np.concatenate([v, q[:, : d - k]], axis=1)


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    """N(rho) = Tr_env[U (rho ⊗ |0><0|_env') U^dagger].

    The dilation acts on ``in ⊗ env'`` and its output is ordered ``out ⊗ env``.
    Kraus and Choi views are derived on first use and cached.
    """

    dilation: np.ndarray
    in_dim: int
    out_dim: int
    _cache: dict = field(default_factory=dict, repr=False)
    _lock: threading.RLock = field(default_factory=threading.RLock, repr=False)

    def __post_init__(self):
        u = np.array(_check_square(self.dilation, "dilation"), dtype=complex)
        big = u.shape[0]
        if big % self.in_dim or big % self.out_dim:
            raise ShapeError(f"dilation size {big} not divisible by in_dim {self.in_dim} and out_dim {self.out_dim}")
        if np.linalg.norm(dagger(u) @ u - np.eye(big)) > tol_unitary(big):
            raise NotUnitary("dilation is not unitary")
        u.setflags(write=False)
        object.__setattr__(self, "dilation", u)

    @property
    def envp_dim(self) -> int:
        return self.dilation.shape[0] // self.in_dim

    @property
    def env_dim(self) -> int:
        return self.dilation.shape[0] // self.out_dim

    def _cached(self, key, build):
        val = self._cache.get(key)
        if val is None:
            with self._lock:
                val = self._cache.get(key)
                if val is None:
                    val = build()
                    self._cache[key] = val
        return val

    @property
    def isometry(self) -> np.ndarray:
        """Stinespring isometry in -> out ⊗ env (dilation restricted to env' = |0>)."""
        return self._cached("iso", lambda: np.ascontiguousarray(self.dilation[:, :: self.envp_dim]))

    @property
    def kraus(self) -> np.ndarray:
        def build():
            v = self.isometry.reshape(self.out_dim, self.env_dim, self.in_dim)
            ks = np.transpose(v, (1, 0, 2))
            keep = np.linalg.norm(ks, axis=(1, 2)) > 1e-14
            return ks[keep] if keep.any() else ks[:1]
        return self._cached("kraus", build)

    @property
    def choi(self) -> np.ndarray:
        """sum_ij |i><j|_in ⊗ N(|i><j|)."""
        def build():
            v = self.isometry.reshape(self.out_dim, self.env_dim, self.in_dim)
            # C[(i,a),(j,b)] = sum_e V[a,e,i] conj(V[b,e,j])
            c = np.einsum("aei,bej->iajb", v, v.conj())
            return c.reshape(self.in_dim * self.out_dim, self.in_dim * self.out_dim)
        return self._cached("choi", build)

    def apply(self, rho) -> np.ndarray:
        return apply(self, rho)

    def adjoint_apply(self, m) -> np.ndarray:
        return adjoint_apply(self, m)


def apply(ch: QuantumChannel, rho) -> np.ndarray:
    r = as_operator(rho)
    if r.shape[0] != ch.in_dim:
        raise ShapeError(f"input dimension {r.shape[0]} does not match channel in_dim {ch.in_dim}")
    v = ch.isometry
    out = partial_trace(v @ r @ dagger(v), [ch.out_dim, ch.env_dim], [0])
    return (out + dagger(out)) / 2


def adjoint_apply(ch: QuantumChannel, m) -> np.ndarray:
    """Heisenberg-picture map N^dagger(m) = V^dagger (m ⊗ I_env) V."""
    m = _check_hermitian(m, "observable")
    if m.shape[0] != ch.out_dim:
        raise ShapeError(f"observable dimension {m.shape[0]} does not match channel out_dim {ch.out_dim}")
    v = ch.isometry
    out = dagger(v) @ np.kron(m, np.eye(ch.env_dim)) @ v
    return (out + dagger(out)) / 2


def from_isometry(v: np.ndarray, out_dim: int) -> QuantumChannel:
    """Channel rho -> Tr_env[V rho V^dagger] for an isometry into out ⊗ env."""
    v = np.asarray(v, dtype=complex)
    big, d_in = v.shape
    if big % out_dim:
        raise ShapeError("isometry output dimension not divisible by out_dim")
    env = big // out_dim
    # pad env until in_dim divides out*env so the isometry extends to a dilation
    pad = 1
    while (out_dim * env * pad) % d_in:
        pad += 1
    if pad > 1:
        v = _pad_env(v, out_dim, env, pad)
    full = v.shape[0]
    envp = full // d_in
    u = np.zeros((full, full), dtype=complex)
    w = complete_isometry(v)
    # columns of u with env' = 0 must carry v
    cols_zero = np.arange(d_in) * envp
    others = np.setdiff1d(np.arange(full), cols_zero)
    u[:, cols_zero] = w[:, :d_in]
    u[:, others] = w[:, d_in:]
    return QuantumChannel(u, d_in, out_dim)


def _pad_env(v, out_dim, env, pad):
    d_in = v.shape[1]
    t = v.reshape(out_dim, env, d_in)
    padded = np.zeros((out_dim, env * pad, d_in), dtype=complex)
    padded[:, ::pad, :] = t
    return padded.reshape(-1, d_in)


def from_kraus(kraus: Sequence[np.ndarray]) -> QuantumChannel:
    ks = np.asarray(kraus, dtype=complex)
    n, d_out, d_in = ks.shape
    v = np.transpose(ks, (1, 0, 2)).reshape(d_out * n, d_in)
    if np.linalg.norm(dagger(v) @ v - np.eye(d_in)) > tol_unitary(d_in):
        raise ShapeError("Kraus operators are not trace preserving")
    return from_isometry(v, d_out)


def unitary_channel(u: np.ndarray) -> QuantumChannel:
    u = np.asarray(u, dtype=complex)
    return QuantumChannel(u, u.shape[0], u.shape[0])


def identity_channel(d: int) -> QuantumChannel:
    return unitary_channel(np.eye(d))


def from_circuit_dilation(u: np.ndarray, wire_dims: Sequence[int], in_wires: Sequence[int],
                          traced_out: Sequence[int]) -> QuantumChannel:
    """Channel from a dilation on wires; ``in_wires`` carry the input (others start in |0>)
    and ``traced_out`` are discarded at the end."""
    dims = list(wire_dims)
    n = len(dims)
    in_wires = list(in_wires)
    traced = list(traced_out)
    env_in = [w for w in range(n) if w not in in_wires]
    keep = [w for w in range(n) if w not in traced]
    in_order = in_wires + env_in
    out_order = keep + traced
    p_in = _perm(dims, in_order)
    p_out = _perm(dims, out_order)
    big = p_out @ u @ dagger(p_in)
    d_in = int(np.prod([dims[w] for w in in_wires]))
    d_out = int(np.prod([dims[w] for w in keep]))
    return QuantumChannel(big, d_in, d_out)


def _perm(dims, order):
    from .numerics import permutation_matrix
    return permutation_matrix(dims, order)


# --- entanglement-breaking channels -------------------------------------

@dataclass(frozen=True, eq=False)
class EBChannel:
    """Measure-prepare channel rho -> sum_x Tr[mu_x rho] phi_x."""

    povm: tuple
    states: tuple

    def __post_init__(self):
        mus = [np.array(_check_hermitian(m, "POVM element"), dtype=complex) for m in self.povm]
        phis = [np.asarray(s.amplitudes if isinstance(s, PureState) else s, dtype=complex).reshape(-1)
                for s in self.states]
        if len(mus) != len(phis) or not mus:
            raise ShapeError("POVM and state lists must be non-empty and of equal length")
        d = mus[0].shape[0]
        for m in mus:
            if m.shape != (d, d):
                raise ShapeError("POVM elements have different dimensions")
            if np.linalg.eigvalsh(m)[0] < -1e-8:
                raise ShapeError("POVM element is not PSD")
        if np.linalg.norm(sum(mus) - np.eye(d)) > 1e-8:
            raise ShapeError("POVM elements do not sum to the identity")
        r = phis[0].size
        for p in phis:
            if p.size != r or abs(np.linalg.norm(p) - 1) > 1e-9:
                raise ShapeError("prepared states must be normalized and of equal dimension")
        object.__setattr__(self, "povm", tuple(mus))
        object.__setattr__(self, "states", tuple(phis))

    @property
    def in_dim(self) -> int:
        return self.povm[0].shape[0]

    @property
    def out_dim(self) -> int:
        return self.states[0].size

    def kraus(self) -> list[np.ndarray]:
        ks = []
        for mu, phi in zip(self.povm, self.states):
            lam, vec = np.linalg.eigh(mu)
            for l, v in zip(lam, vec.T):
                if l > 1e-14:
                    ks.append(np.sqrt(l) * np.outer(phi, v.conj()))
        return ks

    def to_channel(self) -> QuantumChannel:
        return from_kraus(self.kraus())


def eb_apply(eb: EBChannel, rho) -> np.ndarray:
    r = as_operator(rho)
    if r.shape[0] != eb.in_dim:
        raise ShapeError("input dimension does not match the POVM")
    out = np.zeros((eb.out_dim, eb.out_dim), dtype=complex)
    for mu, phi in zip(eb.povm, eb.states):
        out += np.real(np.trace(mu @ r)) * np.outer(phi, phi.conj())
    return out


def eb_extend(eb: EBChannel, psi, s_dim: int | None = None) -> np.ndarray:
    """Apply the channel to the S' half of a state on S' ⊗ S; returns a state on R ⊗ S.

    The result is sum_x p(x) phi_x ⊗ psi_x and is a separable extension of
    Tr_{S'}[psi]. Outcomes with p(x) < 1e-14 are dropped.
    """
    rho = as_operator(psi)
    dp = eb.in_dim
    if rho.shape[0] % dp:
        raise ShapeError("state dimension is not a multiple of the POVM dimension")
    ds = rho.shape[0] // dp
    if s_dim is not None and s_dim != ds:
        raise ShapeError("declared S dimension does not match")
    t = rho.reshape(dp, ds, dp, ds)
    out = np.zeros((eb.out_dim * ds, eb.out_dim * ds), dtype=complex)
    for mu, phi in zip(eb.povm, eb.states):
        # unnormalised conditional state Tr_{S'}[(mu ⊗ I) rho]
        cond = np.einsum("ba,asbt->st", mu, t)
        p = np.real(np.trace(cond))
        if p < 1e-14:
            continue
        out += np.kron(np.outer(phi, phi.conj()), cond)
    return (out + dagger(out)) / 2


def purify(rho, ref_dim: int | None = None) -> PureState:
    """Canonical purification sum_i sqrt(lam_i) |i>_R |v_i>_S, reference first.

    The reference dimension is the rank of rho unless ``ref_dim`` is given.
    """
    r = as_operator(rho)
    lam, vecs = np.linalg.eigh((r + dagger(r)) / 2)
    order = np.argsort(lam)[::-1]
    lam = np.clip(lam[order], 0.0, None)
    vecs = vecs[:, order]
    rank = max(1, int(np.sum(lam > 1e-14)))
    k = rank if ref_dim is None else ref_dim
    if k < rank:
        raise ShapeError(f"reference dimension {k} smaller than rank {rank}")
    d = r.shape[0]
    psi = np.zeros((k, d), dtype=complex)
    for i in range(rank):
        psi[i] = np.sqrt(lam[i]) * vecs[:, i]
    psi = psi.reshape(-1)
    psi /= np.linalg.norm(psi)
    return PureState(psi, (k, d))


def choi_state(ch: QuantumChannel) -> np.ndarray:
    return ch.choi / ch.in_dim


def channel_to_json(ch: QuantumChannel) -> dict:
    from .circuits import matrix_to_json
    return {"dilation": {"matrix": matrix_to_json(ch.dilation)}, "in_dim": ch.in_dim, "out_dim": ch.out_dim}


def channel_from_json(data: dict) -> QuantumChannel:
    from .circuits import circuit_from_json, compile_circuit, matrix_from_json
    dil = data["dilation"]
    if "registers" in dil or "circuit" in dil:
        circ = circuit_from_json(dil.get("circuit", dil))
        u = compile_circuit(circ)
        dims = circ.wire_dims
        n_in = int(data["in_qubits"])
        traced = [circ.wire_index(w) for w in data.get("traced_out", [])]
        return from_circuit_dilation(u, dims, list(range(n_in)), traced)
    u = matrix_from_json(dil["matrix"] if isinstance(dil, dict) else dil)
    if "in_dim" in data:
        return QuantumChannel(u, int(data["in_dim"]), int(data["out_dim"]))
    return QuantumChannel(u, 2 ** int(data["in_qubits"]), 2 ** int(data["out_qubits"]))
