"""Command-line front end; every command prints one JSON report on stdout.

Exit codes: 0 on success, 1 when ``verify-reduction`` sees a failing trial,
2 on an error (the report then carries an ``error`` object with a stable code).
"""

from __future__ import annotations

import argparse
import hashlib
import math
import os
import sys
import time
from typing import Sequence

import numpy as np

from . import __version__, io
from .errors import BadParams, SymkitError
from .reductions import REDUCTION_KINDS


class RunReport(dict):
    """command, inputs (sha256 of input bytes), seed, results, wall_time_ms, version."""

    def __init__(self, command: str, seed=None):
        super().__init__(command=command, inputs={}, seed=seed, results=None, wall_time_ms=None,
                         version=__version__)
        self._t0 = time.perf_counter()

    def add_input(self, name: str, raw: bytes):
        self["inputs"][name] = "sha256:" + hashlib.sha256(raw).hexdigest()

    def finish(self, results) -> RunReport:
        self["results"] = results
        self["wall_time_ms"] = round((time.perf_counter() - self._t0) * 1000, 3)
        return self


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("SYMKIT_THREADS", "1")))
    except ValueError:
        return 1


def _load(path: str | None, bundled: str | None, report: RunReport):
    if bundled:
        raw = io.bundled(bundled)
        report.add_input(f"bundled:{bundled}", raw)
    elif path:
        with open(path, "rb") as fh:
            raw = fh.read()
        report.add_input(path, raw)
    else:
        raise BadParams("give an input file or --bundled NAME")
    return io.loads(raw)


def cmd_measure(args) -> tuple[RunReport, int]:
    report = RunReport("measure", args.seed)
    inst = io.instance_from_json(_load(args.instance, args.bundled, report))
    kw = {}
    if inst.kind in ("StateBSE", "SepExtBose"):
        kw = {"restarts": args.restarts, "seed": args.seed}
    res = inst.measure(**kw)
    out = res.to_json()
    out["instance_kind"] = inst.kind
    out["alpha"], out["beta"] = inst.alpha, inst.beta
    out["verdict"] = inst.decide(res.value)
    return report.finish(out), 0


def cmd_verify_reduction(args) -> tuple[RunReport, int]:
    from .reductions import run_verification
    report = RunReport("verify-reduction", args.seed)
    kinds = REDUCTION_KINDS if args.kind == "all" else (args.kind,)
    out = {}
    all_ok = True
    for kind in kinds:
        trials = run_verification(kind, args.trials, args.seed, workers=_threads())
        ok = all(v.ok for v in trials)
        all_ok &= ok
        out[kind] = {"all_pass": ok, "trials": len(trials), "failures": sum(not v.ok for v in trials),
                     "max_diff": max((v.diff for v in trials), default=0.0),
                     "results": [v.to_json() for v in trials]}
    report.finish({"all_pass": all_ok, "kinds": out})
    return report, 0 if all_ok else 1


def cmd_run_protocol(args) -> tuple[RunReport, int]:
    from .protocols import plan_shots, run_detailed, run_shots
    report = RunReport("run-protocol", args.seed)
    data = _load(args.protocol, args.bundled, report)
    p, strategy = io.protocol_from_json(data)
    run = run_detailed(p, strategy)
    out = {"kind": p.kind, "decision": p.decision, "strategy": strategy.kind, "exact": run.probability,
           "details": {k: v for k, v in run.details.items() if isinstance(v, (int, float, str, list))}}
    shots = args.shots
    if shots is None and args.epsilon is not None:
        shots = plan_shots(args.epsilon, args.delta, 1.0).n
    if shots:
        est, count = run_shots(p, run.strategy, shots, args.seed)
        # Hoeffding accuracy reached with this many shots at confidence 1 - delta
        eps = math.sqrt(math.log(2 / args.delta) / (2 * shots))
        out.update(shots=shots, estimate=est, accept_count=count,
                   plan={"epsilon": eps, "delta": args.delta, "M": 1.0, "n": shots})
    return report.finish(out), 0


def cmd_plan_shots(args) -> tuple[RunReport, int]:
    from .protocols import plan_shots, plan_shots_squared
    report = RunReport("plan-shots")
    plan = plan_shots_squared(args.epsilon, args.delta) if args.squared else plan_shots(args.epsilon, args.delta, args.M)
    return report.finish(plan.to_json()), 0


BUILD_KINDS = ("bqp_to_bose", "bqp_to_hs", "qma_to_channel_bose", "qsd_to_symtd", "symtd_to_symfid",
               "qip2_to_bse", "qip3_to_channel_bse", "qipeb2_to_sepext", "ham_max_spec", "ham_avg_spec")


def _random_ham(rng, kind):
    from .optimize.haar import haar_random_unitary
    from .reductions import SymmetryInstance
    from .symmetry import c2_from_unitary, shift_rep
    n = int(rng.integers(1, 3))
    d = 2 ** n
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    h = (a + a.conj().T) / 2
    rep = shift_rep(d) if rng.random() < 0.5 else c2_from_unitary(_random_involution(d, rng, haar_random_unitary))
    t = float(rng.uniform(0, np.pi))
    label = "HamMaxSpec" if kind == "ham_max_spec" else "HamAvgSpec"
    return SymmetryInstance(label, rep, {"hamiltonian": h, "t": t}, 1.0, 0.0)


def _random_involution(d, rng, haar):
    u = haar(d, rng)
    signs = np.where(rng.random(d) < 0.5, 1.0, -1.0)
    v = u @ np.diag(signs) @ u.conj().T
    return (v + v.conj().T) / 2


def cmd_build_instance(args) -> tuple[RunReport, int]:
    from . import reductions as red
    from .optimize.haar import make_rng
    report = RunReport("build-instance", args.seed)
    rng = make_rng(args.seed)
    kind = args.kind
    if args.circuit:
        data = _load(args.circuit, None, report)
        circ = io.circuit_from_json(data.get("circuit", data))
        if kind in ("bqp_to_bose", "bqp_to_hs"):
            q = red.BQPCircuit(circ, args.input_x, args.input_register, args.decision)
            inst = red.bqp_to_bose(q) if kind == "bqp_to_bose" else red.bqp_to_hs(q)
        elif kind == "qma_to_channel_bose":
            inst = red.qma_to_channel_bose(circ, args.input_x, args.decision, args.input_register,
                                           args.prover_register)
        else:
            raise BadParams(f"--circuit is supported for bqp_to_bose, bqp_to_hs and qma_to_channel_bose, not {kind}")
    elif kind in ("bqp_to_bose", "bqp_to_hs"):
        q = red.random_bqp(rng)
        inst = red.bqp_to_bose(q) if kind == "bqp_to_bose" else red.bqp_to_hs(q)
    elif kind == "qma_to_channel_bose":
        inst = red.random_qma(rng)
    elif kind == "qsd_to_symtd":
        inst = red.random_qsd(rng)
    elif kind == "symtd_to_symfid":
        inst = red.symtd_to_symfid(red.random_qsd(rng))
    elif kind == "qip2_to_bse":
        inst = red.random_qip2(rng)
    elif kind == "qip3_to_channel_bse":
        inst = red.random_qip3(rng)
    elif kind == "qipeb2_to_sepext":
        inst = red.random_qipeb2(rng)
    else:
        inst = _random_ham(rng, kind)
    doc = io.instance_to_json(inst)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(io.dumps(doc, pretty=args.pretty))
        with open(args.out, "rb") as fh:
            report["outputs"] = {args.out: "sha256:" + hashlib.sha256(fh.read()).hexdigest()}
    return report.finish({"kind": inst.kind, "instance": doc}), 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="symkit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"symkit {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--pretty", action="store_true", help="indent the JSON report")
    sub = p.add_subparsers(dest="command", required=True)

    m = sub.add_parser("measure", parents=[common], help="evaluate the measure of an instance file")
    m.add_argument("instance", nargs="?")
    m.add_argument("--bundled", help="use a bundled example, e.g. bose_c2.json")
    m.add_argument("--restarts", type=int, default=20)
    m.add_argument("--seed", type=int, default=0)
    m.set_defaults(func=cmd_measure)

    v = sub.add_parser("verify-reduction", parents=[common], help="randomized identity checks for a reduction")
    v.add_argument("--kind", required=True, choices=REDUCTION_KINDS + ("all",))
    v.add_argument("--trials", type=int, default=10)
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify_reduction)

    r = sub.add_parser("run-protocol", parents=[common], help="exact and sampled acceptance of a protocol")
    r.add_argument("protocol", nargs="?")
    r.add_argument("--bundled")
    r.add_argument("--shots", type=int)
    r.add_argument("--epsilon", type=float, help="choose the shot count by the Hoeffding plan")
    r.add_argument("--delta", type=float, default=0.05)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--json", action="store_true", help="accepted for scripts; output is always JSON")
    r.set_defaults(func=cmd_run_protocol)

    s = sub.add_parser("plan-shots", parents=[common], help="Hoeffding shot counts")
    s.add_argument("--epsilon", type=float, required=True)
    s.add_argument("--delta", type=float, required=True)
    s.add_argument("--M", type=float, default=1.0)
    s.add_argument("--squared", action="store_true", help="plan for the square-root estimator")
    s.set_defaults(func=cmd_plan_shots)

    b = sub.add_parser("build-instance", parents=[common], help="write an instance JSON from a reduction")
    b.add_argument("--kind", required=True, choices=BUILD_KINDS)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--circuit", help="circuit JSON for the BQP and QMA builders (random when omitted)")
    b.add_argument("--input-x", default="")
    b.add_argument("--input-register", default="S")
    b.add_argument("--prover-register", default="P")
    b.add_argument("--decision", default="D")
    b.add_argument("--out")
    b.set_defaults(func=cmd_build_instance)
    return p


def _error_report(command: str, exc: BaseException) -> dict:
    code = getattr(exc, "code", None)
    if not isinstance(code, str):
        code = "IO_ERROR" if isinstance(exc, OSError) else "INTERNAL_ERROR"
    return {"command": command, "version": __version__,
            "error": {"code": code, "type": type(exc).__name__, "message": str(exc)}}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report, code = args.func(args)
    except (SymkitError, OSError) as exc:
        print(io.dumps(_error_report(args.command, exc), pretty=args.pretty))
        return 2
    print(io.dumps(report, pretty=args.pretty))
    return code


if __name__ == "__main__":
    sys.exit(main())
