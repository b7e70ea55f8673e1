import json
import math

import numpy as np
import pytest

from catalyx.config import ConfigError, InitialCondition, RunConfig
from catalyx.expressions import Expression, ExpressionError

from conftest import CONFIG_DIR


def test_expression_grammar():
    pts = np.array([[0.0, 0.0], [0.5, 1.0], [1.0, 2.0]])
    f = Expression("1 + 0.5*cos(pi*x) - pow(y, 2)/4 + exp(-x)*sin(y)")
    x, y = pts.T
    ref = 1 + 0.5 * np.cos(np.pi * x) - y ** 2 / 4 + np.exp(-x) * np.sin(y)
    assert np.allclose(f(pts), ref, rtol=0, atol=1e-15)
    assert Expression("2^3")(pts).tolist() == [8.0] * 3
    assert Expression("-e")(pts)[0] == -math.e


@pytest.mark.parametrize("src", ["__import__('os')", "x.real", "log(x)", "sin(x, y)", "z + 1", "[1]", "1 if x else 2",
                                 "'a'", "x < 1", "sin(x=1)"])
def test_expression_rejects(src):
    with pytest.raises(ExpressionError):
        Expression(src)


def test_expression_constant_broadcasts():
    assert Expression("3")(np.zeros((4, 1))).tolist() == [3.0] * 4


def test_initial_condition_forms():
    ic = InitialCondition.from_dict({"type": "constant", "values": [1, 2]})
    assert ic.evaluate(np.zeros((3, 1))).tolist() == [[1.0, 2.0]] * 3
    with pytest.raises(ConfigError):
        InitialCondition.from_dict({"type": "expression", "species": ["x +"]})
    with pytest.raises(ConfigError):
        InitialCondition.from_dict({"type": "gaussian"})


def test_reference_config_loads():
    cfg = RunConfig.load(CONFIG_DIR / "three_species.json")
    assert cfg.network.n_species == 3 and cfg.grid.cells == (64,)
    state, bnd = cfg.initial_state()
    assert state.c.shape == (64, 3) and bnd.values.shape == (2, 3)


def test_round_trip(tmp_path):
    cfg = RunConfig.load(CONFIG_DIR / "three_species.json")
    cfg.dump(tmp_path / "a.json")
    again = RunConfig.load(tmp_path / "a.json")
    assert again.to_dict() == cfg.to_dict()


def test_network_file_reference(tmp_path):
    data = json.loads((CONFIG_DIR / "three_species.json").read_text())
    (tmp_path / "net.json").write_text(json.dumps(data.pop("network")))
    data["network_file"] = "net.json"
    (tmp_path / "cfg.json").write_text(json.dumps(data))
    assert RunConfig.load(tmp_path / "cfg.json").network.species_names == ["A1", "A2", "A3"]
    data["network_file"] = "missing.json"
    (tmp_path / "cfg.json").write_text(json.dumps(data))
    with pytest.raises(ConfigError):
        RunConfig.load(tmp_path / "cfg.json")


@pytest.mark.parametrize("mutate", [
    lambda d: d.pop("grid"),
    lambda d: d["solver"].update(dt=-1),
    lambda d: d["monitors"].update(mass_tol=0),
    lambda d: d["initial"].update(species=["1", "1"]),
    lambda d: d.update(network={"species": ["A"]}),
    lambda d: d["grid"].update(cells=[2]),
])
def test_malformed_configs(mutate):
    data = json.loads((CONFIG_DIR / "three_species.json").read_text())
    mutate(data)
    with pytest.raises(ConfigError):
        RunConfig.from_dict(data)


def test_missing_and_invalid_files(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig.load(tmp_path / "nope.json")
    (tmp_path / "bad.json").write_text("{not json")
    with pytest.raises(ConfigError):
        RunConfig.load(tmp_path / "bad.json")
