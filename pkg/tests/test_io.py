import json
from importlib import resources

import numpy as np
import pytest

from symkit import io
from symkit import protocols as pr
from symkit import reductions as red
from symkit.errors import ParseError, SchemaError
from symkit.optimize.haar import make_rng, random_density

BUNDLED = sorted(p.name for p in resources.files("symkit").joinpath("data").iterdir() if p.name.endswith(".json"))
PROTOCOL_FILES = {"ham_qma_z.json", "uhlmann_zero.json"}


def canonical(name):
    data = io.loads(io.bundled(name))
    if name in PROTOCOL_FILES:
        p, s = io.protocol_from_json(data)
        return {"protocol": io.protocol_to_json(p), "strategy": io.strategy_to_json(s)}
    return io.instance_to_json(io.instance_from_json(data))


def test_bundled_examples_present():
    assert {"bose_c2.json", "hs_shift3.json", "qip2_accept.json"} | PROTOCOL_FILES <= set(BUNDLED)


@pytest.mark.parametrize("name", BUNDLED)
def test_bundled_round_trip(name):
    once = canonical(name)
    text = io.dumps(once)
    if name in PROTOCOL_FILES:
        p, s = io.protocol_from_json({**once["protocol"], "strategy": once["strategy"]})
        twice = {"protocol": io.protocol_to_json(p), "strategy": io.strategy_to_json(s)}
    else:
        twice = io.instance_to_json(io.instance_from_json(json.loads(text)))
    assert io.dumps(twice) == text


def test_bundled_values():
    assert io.instance_from_json(io.loads(io.bundled("bose_c2.json"))).measure().value == 1.0
    assert io.instance_from_json(io.loads(io.bundled("hs_shift3.json"))).measure().value == pytest.approx(4 / 3)
    p, s = io.protocol_from_json(io.loads(io.bundled("ham_qma_z.json")))
    assert pr.run_exact(p, s) == pytest.approx(1)
    p, s = io.protocol_from_json(io.loads(io.bundled("uhlmann_zero.json")))
    assert pr.run_exact(p, s) == pytest.approx(0.5)


@pytest.mark.parametrize("builder", [lambda r: red.bqp_to_bose(red.random_bqp(r)),
                                     lambda r: red.bqp_to_hs(red.random_bqp(r)),
                                     red.random_qma, red.random_qsd,
                                     lambda r: red.symtd_to_symfid(red.random_qsd(r)),
                                     red.random_qip2, red.random_qip3, red.random_qipeb2])
def test_instance_round_trip_bit_exact(builder):
    inst = builder(make_rng(17))
    doc = io.instance_to_json(inst)
    back = io.instance_from_json(json.loads(io.dumps(doc)))
    assert io.instance_to_json(back) == doc
    if "state" in inst.payload:
        assert np.array_equal(back.state, inst.state)


def test_floats_bit_exact():
    a = random_density(3, 2)
    assert np.array_equal(io.array_from_json(json.loads(io.dumps(io.array_to_json(a)))), a)


def test_shorthand_instance():
    doc = {"kind": "StateBose", "rep": {"order": 2, "elements": [[[[1, 0], [0, 0]], [[0, 0], [1, 0]]],
                                                                  [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]]],
                                        "mult_table": [[0, 1], [1, 0]]},
           "state": {"density": [[[0.5, 0], [0, 0]], [[0, 0], [0.5, 0]]]}}
    assert io.instance_from_json(doc).measure().value == pytest.approx(0.5)


def test_errors():
    with pytest.raises(ParseError):
        io.loads("{not json")
    with pytest.raises(SchemaError):
        io.instance_from_json({"kind": "StateBose"})
    with pytest.raises(SchemaError):
        io.instance_from_json({"kind": "Nope", "rep": {}})
    with pytest.raises(SchemaError):
        io.protocol_from_json({"kind": "BoseTest", "rep": {"elements": "x"}})
    with pytest.raises(ValueError):
        io.dumps({"x": float("nan")})
