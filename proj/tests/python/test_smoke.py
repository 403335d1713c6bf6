import math

import pytest

import teamrules


def small_config(**search):
    return {
        "name": "smoke",
        "dataset": {"name": "checkers", "n_train": 400, "n_test": 100},
        "human": {"adb_modes": ["NEUTRAL"]},
        "search": {"iterations": 100, **search},
        "sweep": {"alphas": [0.0, 0.5], "seeds": [0, 1], "modes": ["TEAMRULES", "BRS_LIKE"]},
    }


def test_generate_shapes_and_labels():
    x, y, names = teamrules.generate("checkers", 50, seed=3)
    assert x.shape == (50, 2)
    assert y.shape == (50,)
    assert set(y.tolist()) <= {0, 1}
    assert names == ["x1", "x2"]
    x2, y2, _ = teamrules.generate("checkers", 50, seed=3)
    assert (x == x2).all() and (y == y2).all()


def test_resolved_config_fills_defaults():
    cfg = teamrules.resolve_config({"dataset": {"name": "gaussian"}})
    assert cfg["search"]["max_rule_length"] == 3
    assert cfg["sweep"]["seeds"] == [0, 1, 2, 3, 4]


def test_bad_config_raises():
    with pytest.raises(teamrules.ConfigError):
        teamrules.resolve_config({"search": {"iterations": 0}})
    with pytest.raises(teamrules.ConfigError):
        teamrules.resolve_config("{not json")


def test_fit_returns_rules_and_record():
    out = teamrules.fit(small_config())
    rec = out["record"]
    assert rec["ttl"] == rec["tdl"] + rec["cl"]
    trace = out["loss_trace"]
    assert all(b <= a for a, b in zip(trace, trace[1:]))
    assert isinstance(out["rules_text"], str)
    assert teamrules.fit(small_config()) == out


def test_sweep_records_and_stats(tmp_path):
    res = teamrules.sweep(small_config(), jobs=2)
    assert res["failures"] == []
    # 2 seeds x 2 alphas x (2 modes + human)
    assert len(res["records"]) == 12
    for r in res["records"]:
        assert r["ttl"] == r["tdl"] + r["cl"]
    assert math.isclose(teamrules.spearman([1, 2, 3], [3, 2, 1]), -1.0)
    assert teamrules.paired_ttest([0, 0, 0], [1, 1, 1]) == 0.0


def test_presets_load():
    cfg = teamrules.load_preset("table1-checkers")
    assert cfg["sweep"]["modes"] == ["TEAMRULES", "HYRS_ADAPTED", "BRS_LIKE"]
