import json
from pathlib import Path

import pytest

from agriwsn.config import ExperimentConfig, config_from_dict, load_config
from agriwsn.errors import ConfigError

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def test_shipped_default_config_matches_builtin_defaults():
    cfg = load_config(CONFIGS / "default.json")
    ref = ExperimentConfig()
    for name in ("field", "radios", "placement", "gdl", "alignment", "extras", "pso", "fahp", "metrics", "seeds"):
        assert getattr(cfg, name) == getattr(ref, name), name
    assert len(cfg.seeds) >= 20


def test_none_gives_defaults():
    assert load_config(None).field.n_cells == 36


@pytest.mark.parametrize("data", [
    {"unknown": 1},
    {"gdl": {"nstations": 8}},
    {"extras": {"count": 5, "colour": "red"}},
    {"pso": {"swarm": 3}},
    {"metrics": {"radius": 40}},
    {"field": {"width": 300}},
    {"radios": {"WiFi": {"reach": 70}}},
    {"seeds": []},
    {"seeds": [0, -1]},
    {"output_dir": 3},
    {"alignment": {"min_overlap": 0.4, "max_overlap": 0.3}},
    {"placement": {"fibonacci_walk": "spiral"}},
    {"field": {"width_m": 310}},
])
def test_invalid_configs_rejected(data):
    with pytest.raises(ConfigError):
        config_from_dict(data)


def test_partial_sections_merge_over_defaults():
    cfg = config_from_dict({"extras": {"count": 10}, "metrics": {"r_sense": 30}, "seeds": [4]})
    assert cfg.extras.count == 10 and cfg.extras.bt_range == 15
    assert cfg.metrics.radii()["station"] == 30 and cfg.metrics.radii()["extra"] == 15
    assert cfg.seeds == (4,)


def test_paths_resolve_relative_to_config(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"fahp": {"model": "model.json"}}))
    cfg = load_config(path)
    assert cfg.resolve(cfg.fahp.model) == tmp_path / "model.json"


def test_invalid_json(tmp_path):
    path = tmp_path / "c.json"
    path.write_text("{")
    with pytest.raises(ConfigError):
        load_config(path)
