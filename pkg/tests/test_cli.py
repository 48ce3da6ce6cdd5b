import json

import pytest

from symkit import cli, io


def run(capsys, *argv):
    code = cli.main(list(argv))
    return code, json.loads(capsys.readouterr().out)


def test_plan_shots(capsys):
    code, rep = run(capsys, "plan-shots", "--epsilon", "0.01", "--delta", "0.05", "--M", "1")
    assert code == 0 and rep["results"]["n"] == 18445
    assert {"command", "inputs", "seed", "results", "wall_time_ms", "version"} <= set(rep)
    _, sq = run(capsys, "plan-shots", "--epsilon", "0.1", "--delta", "0.05", "--squared")
    assert sq["results"]["n"] == 18445


def test_measure_bundled(capsys):
    code, rep = run(capsys, "measure", "--bundled", "bose_c2.json")
    assert code == 0 and rep["results"]["value"] == 1.0 and rep["results"]["verdict"] == "yes"
    digest = rep["inputs"]["bundled:bose_c2.json"]
    assert digest.startswith("sha256:") and len(digest) == len("sha256:") + 64


def test_verify_reduction(capsys):
    code, rep = run(capsys, "verify-reduction", "--kind", "bqp_to_bose", "--trials", "100", "--seed", "7")
    assert code == 0 and rep["results"]["all_pass"]
    assert rep["seed"] == 7 and rep["results"]["kinds"]["bqp_to_bose"]["trials"] == 100


def test_build_measure_and_protocol_reproducible(capsys, tmp_path):
    out = tmp_path / "inst.json"
    code, _ = run(capsys, "build-instance", "--kind", "qip2_to_bse", "--seed", "3", "--out", str(out))
    assert code == 0
    _, a = run(capsys, "measure", str(out), "--seed", "1")
    _, b = run(capsys, "measure", str(out), "--seed", "1")
    assert a["results"] == b["results"]
    proto = tmp_path / "proto.json"
    proto.write_text(json.dumps({"instance": json.loads(out.read_text()), "strategy": {"kind": "Optimized"}}))
    _, p = run(capsys, "run-protocol", str(proto), "--shots", "2000", "--seed", "5")
    assert p["results"]["exact"] == pytest.approx(a["results"]["value"], abs=1e-5)
    assert 0 <= p["results"]["estimate"] <= 1 and p["results"]["shots"] == 2000
    _, q = run(capsys, "run-protocol", str(proto), "--shots", "2000", "--seed", "5")
    assert q["results"] == p["results"]


def test_build_from_circuit(capsys, tmp_path):
    circ = {"registers": [{"name": "S", "qubits": 1}, {"name": "D", "qubits": 1}],
            "gates": [{"kind": "H", "targets": ["D.0"]}]}
    f = tmp_path / "c.json"
    f.write_text(json.dumps(circ))
    code, rep = run(capsys, "build-instance", "--kind", "bqp_to_hs", "--circuit", str(f), "--input-x", "1")
    assert code == 0
    inst = io.instance_from_json(rep["results"]["instance"])
    assert inst.measure().value == pytest.approx(0.75)


def test_run_protocol_epsilon_plan(capsys):
    code, rep = run(capsys, "run-protocol", "--bundled", "uhlmann_zero.json", "--epsilon", "0.05", "--seed", "1")
    assert code == 0 and rep["results"]["shots"] == 738
    assert abs(rep["results"]["estimate"] - 0.5) <= 0.05


@pytest.mark.parametrize("argv,code_str", [
    (["measure", "/nonexistent/file.json"], "IO_ERROR"),
    (["plan-shots", "--epsilon", "0", "--delta", "0.05"], "BAD_PARAMS"),
])
def test_error_reports(capsys, argv, code_str):
    code, rep = run(capsys, *argv)
    assert code == 2 and rep["error"]["code"] == code_str


def test_parse_and_schema_errors(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{oops")
    code, rep = run(capsys, "measure", str(bad))
    assert code == 2 and rep["error"]["code"] == "PARSE_ERROR"
    bad.write_text(json.dumps({"kind": "StateBose"}))
    code, rep = run(capsys, "measure", str(bad))
    assert code == 2 and rep["error"]["code"] == "SCHEMA_ERROR"
