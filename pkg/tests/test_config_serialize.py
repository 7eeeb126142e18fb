import json

import numpy as np
import pytest

from slmkit import config
from slmkit.errors import ConfigError, InputError
from slmkit.experiment import ExperimentConfig, config_echo
from slmkit.rbf import RandomSpec, generate_bank
from slmkit.serialize import ExactVdp, dumps, load_model, model_from_dict, model_to_dict, save_model
from slmkit.models import ElmParams, SlmParams


def test_defaults_build_default_config():
    assert config.build(config.defaults()) == ExperimentConfig()


def test_every_default_is_explicit():
    d = config.defaults()
    assert set(d) == {"experiment", "random_spec", "vdp"}
    assert d["experiment"]["h_slm"] == 100 and d["experiment"]["h_elm"] == 300
    assert d["random_spec"]["center_dist"] == {"kind": "normal", "mean": 0.0, "variance": 2.0}
    assert d["vdp"]["dt"] == 0.01


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError):
        config.merge(config.defaults(), {"experiment": {"h_slim": 3}})
    with pytest.raises(ConfigError):
        config.merge(config.defaults(), {"extras": {}})


def test_set_path_and_assignment():
    key, value = config.parse_assignment("vdp.dt=0.02")
    cfg = config.set_path(config.defaults(), key, value)
    assert config.build(cfg).vdp.dt == 0.02
    assert config.parse_assignment("experiment.model_kind=slm") == ("experiment.model_kind", "slm")
    with pytest.raises(ConfigError):
        config.parse_assignment("novalue")


def test_distribution_replaced_wholesale():
    cfg = config.merge(config.defaults(), {"random_spec": {"width_dist": {"kind": "exponential", "rate": 2.0}}})
    assert config.build(cfg).random_spec.width_dist.rate == 2.0


def test_load_file(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"experiment": {"repetitions": 3}}))
    assert config.build(config.load(p)).repetitions == 3
    p.write_text("{not json")
    with pytest.raises(ConfigError):
        config.load(p)
    with pytest.raises(ConfigError):
        config.load(tmp_path / "missing.json")


def test_integer_keys_checked():
    with pytest.raises(ConfigError):
        config.build(config.set_path(config.defaults(), "vdp.steps", 10.5))
    with pytest.raises(ConfigError):
        config.build(config.set_path(config.defaults(), "experiment.h_slm", 0))


def test_config_echo_round_trip():
    cfg = ExperimentConfig(model_kind="slm", h_slm=7, rank_tol=1e-10, base_seed=3)
    assert config.build(json.loads(json.dumps(config_echo(cfg)))) == cfg


@pytest.mark.parametrize("kind", ["slm", "elm"])
def test_model_round_trip_is_bit_exact(kind, tmp_path):
    rng = np.random.default_rng(1)
    bank = generate_bank(RandomSpec(seed=5), 2, 6)
    model = (SlmParams(bank, rng.standard_normal((18, 2))) if kind == "slm"
             else ElmParams(bank, rng.standard_normal((6, 2))))
    path = tmp_path / "m.json"
    save_model(model, path, config={"a": 1})
    back = load_model(path)
    assert type(back) is type(model)
    assert back.bank == model.bank
    mat = "gamma" if kind == "slm" else "b_matrix"
    assert getattr(back, mat).tobytes() == getattr(model, mat).tobytes()
    assert dumps(back, {"a": 1}) == path.read_text()
    doc = json.loads(path.read_text())
    assert doc["format_version"] == 1 and doc["layout"] == "row-major"


def test_stub_model_round_trip():
    doc = model_to_dict(ExactVdp(1.0, 0.01))
    assert model_from_dict(doc) == ExactVdp(1.0, 0.01)


def test_bad_model_documents(tmp_path):
    with pytest.raises(InputError):
        model_from_dict({"format": "other"})
    with pytest.raises(InputError):
        model_from_dict({"format": "slmkit-model", "format_version": 99})
    with pytest.raises(InputError):
        model_from_dict({"format": "slmkit-model", "format_version": 1, "kind": "slm"})
    p = tmp_path / "bad.json"
    p.write_text("[")
    with pytest.raises(InputError):
        load_model(p)
