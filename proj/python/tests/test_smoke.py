import json

import pytest

import scenecraft as sc


def crate_script(seed=5, style="natural"):
    return {
        "seed": seed,
        "style": style,
        "steps": [
            {"op": "layout.solve", "args": {"rooms": [{"name": "room", "width": 5, "length": 4}]}},
            {"op": "asset.add", "args": {"primitive": "box", "id": "crate",
                                         "params": {"category": "furniture", "size": [0.6, 0.6, 0.5], "mass": 8}}},
            {"op": "object.add", "args": {"asset": "crate", "x": 1.0, "y": 1.0}},
            {"op": "object.add", "args": {"asset": "crate", "x": 1.3, "y": 1.1}},
            {"op": "feasibility.enforce", "args": {"stage": "post_furniture"}},
            {"op": "metrics.report"},
        ],
    }


def test_ops_registered():
    names = sc.op_names()
    for op in ("layout.solve", "object.add", "feasibility.enforce", "metrics.report", "compose.pile"):
        assert op in names


def test_script_run_resolves_overlap():
    scene, log = sc.run_script(crate_script())
    assert not log["aborted"]
    assert len(scene) == 2
    report = log["steps"][-1]["payload"]
    assert report["COL"] == 0.0
    assert report["STB"] == 100.0


def test_replay_is_byte_identical():
    a, la = sc.run_script(crate_script())
    b, lb = sc.run_script(crate_script())
    assert a.to_json() == b.to_json()
    assert json.dumps(la) == json.dumps(lb)
    assert sc.Scene.from_json(a.to_json()) == a


def test_apply_and_metrics():
    scene, _ = sc.run_script(crate_script())
    out = sc.apply(scene, "tool.reach", {"room": "room", "hr": 0.3})
    assert out["region_count"] == 1
    report = sc.metrics_report(scene, seed=1)
    assert 0.0 <= report["NAV"] <= 1.0
    assert report["OOB"] == 0.0


def test_errors_carry_codes():
    with pytest.raises(sc.Error) as info:
        sc.run_script({"steps": [{"op": "nope"}]})
    assert info.value.code == "schema"
    scene = sc.Scene()
    with pytest.raises(sc.Error) as info:
        sc.apply(scene, "object.remove", {"id": "ghost"})
    assert info.value.code == "not_found"


def test_noise_and_style():
    assert sc.select_style("a cozy reading nook") == "natural"
    assert sc.select_style("showroom kitchen") == "perfect"
    x, y, t = sc.apply_noise(1.0, 2.0, 0.0, "furniture", "perfect", seed=3)
    assert abs(x - 1.0) < 0.01 and abs(y - 2.0) < 0.01
    assert sc.apply_noise(1.0, 2.0, 0.0, "furniture", "natural", seed=3) == \
        sc.apply_noise(1.0, 2.0, 0.0, "furniture", "natural", seed=3)
