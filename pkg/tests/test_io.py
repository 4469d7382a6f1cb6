import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from equiopinion.dynamics import HomogeneousModel, TensorModel, drift
from equiopinion.errors import DimensionMismatch, SchemaError
from equiopinion.io import (Scenario, dump_json, model_from_json, model_to_json, read_state_csv,
                            state_from_json, state_to_json, write_plot_data, write_state_csv,
                            write_svg_lines)
from equiopinion.state import DeviationState, OpinionState

SPEC = {"na": 4, "no": 3, "alpha": 0.0, "beta": -1.5, "gamma": 0.2, "delta": 0.1, "lambda": 0.3}


def test_state_csv_round_trip(tmp_path):
    x = OpinionState(np.array([[0.2, 0.3, 0.5], [1 / 3, 1 / 3, 1 / 3]]))
    path = tmp_path / "x.csv"
    write_state_csv(x, path)
    assert path.read_text().splitlines()[0] == "agent,opt1,opt2,opt3"
    np.testing.assert_array_equal(read_state_csv(path), x.values)


def test_state_csv_rejects_bad_header(tmp_path):
    path = tmp_path / "x.csv"
    path.write_text("who,a,b\n1,0.5,0.5\n")
    with pytest.raises(SchemaError):
        read_state_csv(path)


def test_state_json_round_trip():
    z = DeviationState(np.array([[0.1, -0.1], [-0.2, 0.2]]))
    obj = json.loads(json.dumps(state_to_json(z)))
    back = state_from_json(obj, deviation=True)
    np.testing.assert_array_equal(back.values, z.values)
    with pytest.raises(DimensionMismatch):
        state_from_json({"na": 3, "no": 2, "values": obj["values"]})
    with pytest.raises(SchemaError):
        state_from_json({"values": obj["values"]})


def test_model_round_trip():
    m = model_from_json(SPEC)
    assert isinstance(m, HomogeneousModel)
    again = model_from_json(model_to_json(m))
    z = np.random.default_rng(0).normal(size=(4, 3))
    z -= z.mean(axis=1, keepdims=True)
    np.testing.assert_array_equal(drift(z, m), drift(z, again))


def test_perturbed_model_is_reproducible():
    spec = dict(SPEC, perturb={"epsilon": 0.01, "seed": 3})
    a, b = model_from_json(spec), model_from_json(spec)
    assert isinstance(a, TensorModel)
    np.testing.assert_array_equal(a.tensor, b.tensor)
    c = model_from_json(spec, seed=4)
    assert not np.array_equal(a.tensor, c.tensor)
    assert isinstance(model_from_json(spec, epsilon=0.0), HomogeneousModel)


def test_model_schema_errors():
    with pytest.raises(SchemaError):
        model_from_json(dict(SPEC, colour="red"))
    with pytest.raises(SchemaError):
        model_from_json({k: v for k, v in SPEC.items() if k != "beta"})
    with pytest.raises(DimensionMismatch):
        model_from_json(dict(SPEC, bias=[[0.0, 0.0]]))
    with pytest.raises(DimensionMismatch):
        model_from_json(dict(SPEC, tensor=np.zeros((4, 4, 3, 2)).tolist()))


def test_scenario_validation(tmp_path):
    ok = Scenario.from_dict({"model": SPEC, "sweep": {"start": 0.1, "stop": 0.5, "num": 5}})
    assert ok.sweep_lambdas() == pytest.approx([0.1, 0.2, 0.3, 0.4, 0.5])
    with pytest.raises(SchemaError):
        Scenario.from_dict({"model": SPEC, "simulation": {"dt": 2.0}})
    with pytest.raises(SchemaError):
        Scenario.from_dict({"model": SPEC, "sweep": {"lambdas": [0.1], "num": 3}})
    with pytest.raises(SchemaError):
        Scenario.from_dict({"model": SPEC, "unknown": 1})
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(SchemaError):
        Scenario.load(bad)


def test_shipped_scenarios_validate():
    from pathlib import Path
    files = sorted((Path(__file__).parents[1] / "scenarios").glob("*.json"))
    assert files
    for f in files:
        sc = Scenario.load(f)
        model_from_json(sc.model_spec)


def test_dump_json_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    dump_json({"z": np.float64(1.5), "a": np.arange(3)}, a)
    dump_json({"a": [0, 1, 2], "z": 1.5}, b)
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(a.read_text())["schema_version"]


def test_plot_outputs(tmp_path):
    t = np.linspace(0, 1, 5)
    write_plot_data(tmp_path / "d.dat", {"t": t, "y": t ** 2})
    lines = (tmp_path / "d.dat").read_text().splitlines()
    assert lines[0] == "# t y" and len(lines) == 6
    assert np.loadtxt(tmp_path / "d.dat").shape == (5, 2)
    write_svg_lines(tmp_path / "p.svg", t, {"a<b": t, "flat": np.zeros(5)}, title="T")
    root = ET.parse(tmp_path / "p.svg").getroot()
    assert len(root.findall("{http://www.w3.org/2000/svg}polyline")) == 2
