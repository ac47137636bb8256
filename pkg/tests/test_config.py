from __future__ import annotations

import json

import pytest

from motivic_wf.config import Config, ConfigError


def test_defaults():
    cfg = Config()
    assert cfg.q == 3 and cfg.K == 6 and cfg.n == 1
    assert cfg.field().q == 3


@pytest.mark.parametrize("q", [2, 3, 4, 5, 7, 8, 9])
def test_for_q(q):
    cfg = Config.for_q(q)
    assert cfg.q == q and cfg.field().q == q


def test_round_trip_through_json(tmp_path):
    cfg = Config.for_q(9, budget=1000, K=3)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg.to_dict()))
    again = Config.load(path)
    assert again.to_dict() == cfg.to_dict()


@pytest.mark.parametrize(
    "data",
    [
        {"budget": 0},
        {"v_min": 5, "v_max": 5},
        {"p": 4},
        {"p": 3, "f": 2, "modulus": [1, 0, 2]},
        {"q": 6},
        {"q": 9, "p": 3, "f": 1},
        {"colour": "red"},
        {"n": 0},
    ],
)
def test_invalid_configs(data):
    with pytest.raises(ConfigError):
        Config.from_dict(data)


def test_unreadable_file(tmp_path):
    with pytest.raises(ConfigError):
        Config.load(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        Config.load(bad)
