"""JSON formats for states, groups, channels, instances and protocols.

Complex numbers are ``[re, im]`` pairs; matrices are nested row lists of
pairs. Floats go through Python's shortest round-trip ``repr``, so every
number reads back bit for bit.

Text that is not JSON raises :class:`ParseError`; well-formed JSON with the
wrong structure raises :class:`SchemaError`.
"""

from __future__ import annotations

import json
from dataclasses import asdict
from functools import wraps
from importlib import resources
from typing import Any

import numpy as np

from .channels import QuantumChannel, channel_from_json, channel_to_json
from .circuits import GateCircuit, circuit_from_json, circuit_to_json, compile_circuit
from .errors import ParseError, SchemaError, SymkitError
from .numerics import as_operator
from .protocols import (
    PROTOCOL_KINDS,
    Protocol,
    ProverStrategy,
    bose_test_protocol,
    ham_qam_protocol,
    ham_qma_protocol,
    hs_swap_protocol,
    optimized,
    protocol_for_instance,
    qip2_protocol,
    qip3_protocol,
    sep_ext_protocol,
    uhlmann_protocol,
)
from .channels import EBChannel
from .reductions import INSTANCE_KINDS, BQPCircuit, QIPDims, StatePrep, SymmetryInstance
from .symmetry import GroupRep, rep_from_json


def _schema(fn):
    """Turn structural lookup failures inside a reader into SchemaError."""

    @wraps(fn)
    def wrapper(*args, **kw):
        try:
            return fn(*args, **kw)
        except SymkitError:
            raise
        except (KeyError, TypeError, IndexError, ValueError, AttributeError) as exc:
            raise SchemaError(f"{fn.__name__}: {type(exc).__name__}: {exc}") from exc

    return wrapper


def loads(text: str | bytes) -> Any:
    try:
        return json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc


def dumps(obj: Any, pretty: bool = False) -> str:
    return json.dumps(obj, indent=2 if pretty else None, sort_keys=pretty, allow_nan=False)


def read_file(path) -> tuple[Any, bytes]:
    """(parsed JSON, raw bytes) of a file."""
    with open(path, "rb") as fh:
        raw = fh.read()
    return loads(raw), raw


def bundled(name: str) -> bytes:
    """Raw bytes of a bundled example file."""
    return resources.files("symkit").joinpath("data", name).read_bytes()


# --- arrays ------------------------------------------------------------------

def array_to_json(a) -> list:
    a = np.asarray(a, dtype=complex)
    if a.ndim == 1:
        return [[float(z.real), float(z.imag)] for z in a]
    if a.ndim == 2:
        return [[[float(z.real), float(z.imag)] for z in row] for row in a]
    raise SchemaError(f"only vectors and matrices are serialized, got shape {a.shape}")


@_schema
def array_from_json(data) -> np.ndarray:
    """Vector (list of pairs) or matrix (rows of pairs), as written by array_to_json."""
    arr = np.asarray(data, dtype=float)
    if arr.ndim in (2, 3) and arr.shape[-1] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    raise SchemaError(f"expected [re, im] pairs, got an array of shape {arr.shape}")


@_schema
def _vector(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 1:
        return arr.astype(complex)
    if arr.ndim == 2 and arr.shape[1] == 2:
        return arr[:, 0] + 1j * arr[:, 1]
    raise SchemaError(f"expected a vector, got an array of shape {arr.shape}")


@_schema
def _matrix(data) -> np.ndarray:
    """Square matrix of [re, im] pairs, or of plain reals."""
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 3 and arr.shape[2] == 2:
        arr = arr[..., 0] + 1j * arr[..., 1]
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise SchemaError(f"expected a square matrix, got an array of shape {arr.shape}")
    return arr.astype(complex)


# --- states ------------------------------------------------------------------

def state_to_json(s) -> dict:
    if isinstance(s, StatePrep):
        return {"prep": {"unitary": array_to_json(s.unitary), "dims": list(s.dims), "keep": list(s.keep)}}
    return {"density": array_to_json(as_operator(s))}


@_schema
def state_from_json(data: dict):
    """A density matrix, or a StatePrep when the state is given by a preparation unitary."""
    if "density" in data:
        return as_operator(_matrix(data["density"]))
    if "pure" in data:
        return as_operator(_vector(data["pure"]))
    if "prep" in data:
        p = data["prep"]
        if "circuit" in p:
            c = circuit_from_json(p["circuit"])
            return StatePrep.from_circuit(c, p["keep"])
        return StatePrep(_matrix(p["unitary"]), tuple(int(d) for d in p["dims"]), tuple(int(k) for k in p["keep"]))
    raise SchemaError("state needs one of 'density', 'pure' or 'prep'")


def _density(x) -> np.ndarray:
    return x.state() if isinstance(x, StatePrep) else as_operator(x)


# --- groups and channels ----------------------------------------------------------

def rep_to_json(rep: GroupRep) -> dict:
    return rep.to_json()


@_schema
def group_from_json(data: dict) -> GroupRep:
    return rep_from_json(data)


@_schema
def read_channel(data: dict) -> QuantumChannel:
    return channel_from_json(data)


def _unitary(data) -> np.ndarray:
    if isinstance(data, dict) and ("registers" in data or "circuit" in data):
        return compile_circuit(circuit_from_json(data.get("circuit", data)))
    if isinstance(data, dict) and "matrix" in data:
        return _matrix(data["matrix"])
    return _matrix(data)


# --- instances ----------------------------------------------------------------

def _encode(v):
    if isinstance(v, QuantumChannel):
        return {"channel": channel_to_json(v)}
    if isinstance(v, QIPDims):
        return {"qip_dims": asdict(v)}
    if isinstance(v, StatePrep):
        return state_to_json(v)
    if isinstance(v, GateCircuit):
        return {"circuit": circuit_to_json(v)}
    if isinstance(v, BQPCircuit):
        return {"bqp": {"circuit": circuit_to_json(v.circuit), "input_x": v.input_x,
                        "input_register": v.input_register, "decision": v.decision}}
    if isinstance(v, np.ndarray):
        return {"array": array_to_json(v)}
    if isinstance(v, (bool, int, float, str)) or v is None:
        return v
    raise SchemaError(f"cannot serialize payload value of type {type(v).__name__}")


def _decode(v):
    if not isinstance(v, dict):
        return v
    if "channel" in v:
        return read_channel(v["channel"])
    if "qip_dims" in v:
        return QIPDims(**{k: int(x) for k, x in v["qip_dims"].items()})
    if "prep" in v or "density" in v or "pure" in v:
        return state_from_json(v)
    if "circuit" in v:
        return circuit_from_json(v["circuit"])
    if "bqp" in v:
        return bqp_from_json(v["bqp"])
    if "array" in v:
        return array_from_json(v["array"])
    raise SchemaError(f"unknown payload entry with keys {sorted(v)}")


@_schema
def bqp_from_json(data: dict) -> BQPCircuit:
    return BQPCircuit(circuit_from_json(data["circuit"]), str(data.get("input_x", "")),
                      data.get("input_register", "S"), data.get("decision", 0))


def instance_to_json(inst: SymmetryInstance) -> dict:
    return {"kind": inst.kind, "rep": rep_to_json(inst.rep), "alpha": float(inst.alpha), "beta": float(inst.beta),
            "payload": {k: _encode(v) for k, v in sorted(inst.payload.items())}}


@_schema
def instance_from_json(data: dict) -> SymmetryInstance:
    """Reads the canonical form (``payload``) or the short hand-written form with
    ``state``, ``channel`` or ``hamiltonian``/``t`` at the top level."""
    kind = data["kind"]
    if kind not in INSTANCE_KINDS:
        raise SchemaError(f"unknown instance kind {kind!r}; expected one of {INSTANCE_KINDS}")
    rep = group_from_json(data["rep"])
    if "payload" in data:
        payload = {k: _decode(v) for k, v in data["payload"].items()}
    else:
        payload = {}
        if "state" in data:
            payload["state"] = _density(state_from_json(data["state"]))
        if "channel" in data:
            payload["channel"] = read_channel(data["channel"])
        if "hamiltonian" in data:
            payload["hamiltonian"] = _matrix(data["hamiltonian"])
            payload["t"] = float(data["t"])
    needs = {"ChannelBose": "channel", "ChannelBSE": "channel", "HamMaxSpec": "hamiltonian",
             "HamAvgSpec": "hamiltonian"}.get(kind, "state")
    if needs not in payload:
        raise SchemaError(f"{kind} instance needs a {needs!r} entry")
    if needs == "state" and isinstance(payload["state"], StatePrep):
        payload["state"] = payload["state"].state()
    return SymmetryInstance(kind, rep, payload, float(data.get("alpha", 1.0)), float(data.get("beta", 0.0)))


# --- protocols -------------------------------------------------------------------

def strategy_to_json(s: ProverStrategy) -> dict:
    out: dict = {"kind": s.kind}
    if s.kind == "Optimized":
        out.update(restarts=s.restarts, seed=s.seed, method=s.method)
    if s.isometry is not None:
        out["isometry"] = array_to_json(s.isometry)
    if s.state is not None:
        out["state"] = array_to_json(np.asarray(s.state).reshape(-1))
    if s.states is not None:
        out["states"] = [array_to_json(np.asarray(v).reshape(-1)) for v in np.atleast_2d(np.asarray(s.states, dtype=complex))]
    if s.eb is not None:
        out["eb"] = {"povm": [array_to_json(m) for m in s.eb.povm], "states": [array_to_json(v) for v in s.eb.states]}
    return out


@_schema
def strategy_from_json(data: dict | None) -> ProverStrategy:
    if data is None:
        return optimized()
    kind = data.get("kind", "Optimized")
    if kind == "Optimized":
        return optimized(int(data.get("restarts", 20)), int(data.get("seed", 0)), data.get("method", "default"))
    if kind == "FixedIsometry":
        st = data.get("state")
        return ProverStrategy("FixedIsometry", isometry=array_from_json(data["isometry"]),
                              state=None if st is None else _vector(st))
    if kind == "FixedEBChannel":
        eb = EBChannel(tuple(_matrix(m) for m in data["eb"]["povm"]),
                       tuple(_vector(v) for v in data["eb"]["states"]))
        return ProverStrategy("FixedEBChannel", eb=eb)
    if kind == "FixedStateFamily":
        states = [_vector(v) for v in data["states"]]
        return ProverStrategy("FixedStateFamily", states=states[0] if len(states) == 1 else states)
    if kind == "None":
        return ProverStrategy("None")
    raise SchemaError(f"unknown prover strategy kind {kind!r}")


def protocol_to_json(p: Protocol) -> dict:
    pl = p.payload
    out: dict = {"kind": p.kind}
    if p.rep is not None:
        out["rep"] = rep_to_json(p.rep)
    if "prep" in pl:
        out["state"] = state_to_json(pl["prep"])
    if "hamiltonian" in pl:
        out["hamiltonian"] = array_to_json(pl["hamiltonian"])
        out["t"] = pl["t"]
    for key in ("psi", "w", "u2"):
        if key in pl:
            out[key] = array_to_json(pl[key])
    if "dims" in pl:
        out["dims"] = asdict(pl["dims"])
    return out


@_schema
def protocol_from_json(data: dict) -> tuple[Protocol, ProverStrategy]:
    """A protocol and the prover strategy named in ``strategy`` (optimized by default)."""
    strategy = strategy_from_json(data.get("strategy"))
    if "instance" in data:
        return protocol_for_instance(instance_from_json(data["instance"])), strategy
    kind = data["kind"]
    if kind not in PROTOCOL_KINDS:
        raise SchemaError(f"unknown protocol kind {kind!r}; expected one of {PROTOCOL_KINDS}")
    if kind in ("QIP2Generic", "QIP3Generic"):
        dims = QIPDims(**{k: int(x) for k, x in data["dims"].items()})
        u2 = _unitary(data["u2"])
        if "u1" in data:
            build = qip2_protocol if kind == "QIP2Generic" else qip3_protocol
            return build(_unitary(data["u1"]), u2, int(data.get("x", 0)), dims), strategy
        key = "psi" if kind == "QIP2Generic" else "w"
        return Protocol(kind, None, {key: array_from_json(data[key]), "u2": u2, "dims": dims}), strategy
    rep = group_from_json(data["rep"])
    if kind in ("HamQMA", "HamQAM"):
        build = ham_qma_protocol if kind == "HamQMA" else ham_qam_protocol
        return build(_matrix(data["hamiltonian"]), float(data["t"]), rep), strategy
    state = state_from_json(data["state"])
    if kind == "BoseTest":
        return bose_test_protocol(rep, state), strategy
    if kind == "HSSwapTest":
        return hs_swap_protocol(rep, state), strategy
    if kind == "UhlmannFid":
        return uhlmann_protocol(state, rep), strategy
    return sep_ext_protocol(state, rep), strategy
