import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tracksweep.errors import InfeasibleConfig, ParseError, SchemaError
from tracksweep.geometry import is_feasible
from tracksweep.synthetic import (SceneConfig, generate_scene, parse_tracks, read_points,
                                  read_scene, read_tracks, write_points, write_scene)


def test_clutter_only_scene():
    sc = generate_scene(SceneConfig(frames=5, targets=0, clutter_per_frame=10, seed=1))
    assert len(sc.points) == 50 and len(sc.gt) == 0


def test_noiseless_target_is_exactly_linear():
    sc = generate_scene(SceneConfig(frames=5, targets=1, clutter_per_frame=0, jitter_sigma=0.0, seed=2))
    ps = sc.points
    assert len(ps) == 5
    t = ps.t.astype(float)
    for a, b in ((ps.x, ps.y), (t, ps.x), (t, ps.y)):
        if np.ptp(a) > 0:
            coef = np.polyfit(a, b, 1)
            assert np.max(np.abs(np.polyval(coef, a) - b)) < 1e-6
    assert sc.gt.tracks[0].residual_xy < 1e-6


def test_same_seed_same_scene():
    cfg = SceneConfig(frames=6, targets=3, clutter_per_frame=20, dropout_prob=0.2, seed=9)
    a, b = generate_scene(cfg), generate_scene(cfg)
    assert a.points == b.points and a.gt.to_dict() == b.gt.to_dict()
    assert generate_scene(SceneConfig(seed=10)).points != a.points


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000), st.integers(3, 8), st.integers(0, 5), st.sampled_from(["uniform", "streak"]))
def test_ground_truth_is_feasible_at_gt_eps(seed, frames, targets, mode):
    cfg = SceneConfig(frames=frames, targets=targets, clutter_per_frame=5, dropout_prob=0.1,
                      seed=seed, clutter_mode=mode)
    sc = generate_scene(cfg)
    ps = sc.points
    assert np.all(np.diff(ps.t) >= 0)
    for tr in sc.gt.tracks:
        v = is_feasible([ps[i] for i in tr.point_ids], cfg.gt_eps, cfg.gt_eps, swap_axes=tr.axis_swapped)
        assert v and len(tr) >= 3


def test_config_validation():
    with pytest.raises(ValueError):
        SceneConfig(frames=0)
    with pytest.raises(ValueError):
        SceneConfig(dropout_prob=1.0)
    with pytest.raises(ValueError):
        SceneConfig(clutter_mode="stars")
    with pytest.raises(InfeasibleConfig):
        generate_scene(SceneConfig(frames=2, targets=1))
    with pytest.raises(InfeasibleConfig):
        generate_scene(SceneConfig(width=10, height=10, speed_range=(50, 60), targets=1))


@pytest.mark.parametrize("seed", range(20))
def test_scene_round_trip(tmp_path, seed):
    rng = np.random.default_rng(seed)
    cfg = SceneConfig(frames=int(rng.integers(3, 8)), targets=int(rng.integers(0, 5)),
                      clutter_per_frame=int(rng.integers(0, 30)), dropout_prob=0.1, seed=seed)
    sc = generate_scene(cfg)
    write_scene(sc, tmp_path)
    back = read_scene(tmp_path)
    assert back.points == sc.points
    assert back.gt.to_dict() == sc.gt.to_dict()
    assert back.config == cfg


def test_missing_frame_column(tmp_path):
    p = tmp_path / "points.csv"
    p.write_text("x,y\n1,2\n")
    with pytest.raises(ParseError) as info:
        read_points(p)
    assert info.value.column == "frame" and "frame" in str(info.value)


def test_bad_number_reports_line_and_column(tmp_path):
    p = tmp_path / "points.csv"
    p.write_text("frame,x,y\n1,2,3\n2,abc,4\n")
    with pytest.raises(ParseError) as info:
        read_points(p)
    assert info.value.line == 3 and info.value.column == "x"


def test_points_csv_columns_any_order(tmp_path):
    p = tmp_path / "points.csv"
    p.write_text("y,frame,x\n5,1,2\n")
    ps = read_points(p)
    assert (ps.x[0], ps.y[0], ps.t[0]) == (2, 5, 1)


def test_write_then_read_points_is_exact(tmp_path):
    sc = generate_scene(SceneConfig(frames=4, targets=2, clutter_per_frame=7, seed=5))
    write_points(sc.points, tmp_path / "p.csv")
    assert read_points(tmp_path / "p.csv") == sc.points


def test_gt_with_unknown_point_id(tmp_path):
    sc = generate_scene(SceneConfig(frames=4, targets=1, clutter_per_frame=2, seed=5))
    doc = sc.gt.to_dict()
    doc["tracks"][0]["point_ids"].append(999)
    with pytest.raises(SchemaError):
        parse_tracks(doc, n_points=len(sc.points))
    with pytest.raises(SchemaError):
        parse_tracks({"nope": []})
    bad = tmp_path / "gt.json"
    bad.write_text("{not json")
    with pytest.raises(ParseError):
        read_tracks(bad)


def test_tracks_json_is_canonical(tmp_path):
    sc = generate_scene(SceneConfig(frames=5, targets=2, clutter_per_frame=3, seed=8))
    _, gt = write_scene(sc, tmp_path)
    text = gt.read_text()
    assert text == json.dumps(json.loads(text), indent=2, sort_keys=True) + "\n"
