import itertools

import numpy as np
import pytest

from tracksweep.baselines import hough_lines, ransac_lines
from tracksweep.detection import (DetectorConfig, HoughConfig, RansacConfig, baseline_detect,
                                  find_all_tracks_with_vertical)
from tracksweep.synthetic import SceneConfig, generate_scene

STEPS = np.arange(8.0)

# rejection-sampled: no three points lie within 0.5 of a common line
CLUTTER = np.array([[41.674, 68.034], [78.527, 94.096], [37.57, 70.677], [34.163, 82.4],
                    [23.065, 87.101], [50.511, 72.534], [53.499, 31.612], [49.43, 5.045],
                    [4.299, 52.996], [47.717, 83.314]])


def test_ransac_single_line():
    pts = np.column_stack([np.arange(10.0), 3 * np.arange(10.0) - 4])
    assert ransac_lines(pts, 1.0, seed=0) == [tuple(range(10))]


def test_ransac_crossing_lines_golden():
    a = np.column_stack([10 * STEPS, 10 * STEPS])
    b = np.column_stack([10 * STEPS, 70 - 10 * STEPS])
    assert ransac_lines(np.vstack([a, b]), 1.0, 1000, 3, seed=7) == [
        tuple(range(8, 16)), tuple(range(8))]


def test_ransac_shared_crossing_point_goes_to_first_line():
    a = np.column_stack([10 * STEPS, 10 * STEPS])
    b = np.column_stack([10 * STEPS, 60 - 10 * STEPS])
    found = ransac_lines(np.vstack([a, b]), 1.0, 1000, 3, seed=7)
    assert found == [(3, 8, 9, 10, 11, 12, 13, 14, 15), (0, 1, 2, 4, 5, 6, 7)]
    assert sorted(map(len, found)) == [7, 9]


def test_clutter_fixture_has_no_near_collinear_triple():
    # every line through two fixture points stays more than 0.5 from the rest
    for i, j in itertools.permutations(range(len(CLUTTER)), 2):
        d = CLUTTER[j] - CLUTTER[i]
        rel = CLUTTER - CLUTTER[i]
        dist = np.abs(d[0] * rel[:, 1] - d[1] * rel[:, 0]) / np.hypot(*d)
        assert np.count_nonzero(dist <= 0.5) == 2


def test_ransac_all_clutter_is_empty():
    assert ransac_lines(CLUTTER, 0.5, 1000, 3, seed=0) == []


def test_ransac_is_seeded():
    rng = np.random.default_rng(1)
    pts = rng.uniform(0, 100, (60, 2))
    assert ransac_lines(pts, 1.0, seed=3) == ransac_lines(pts, 1.0, seed=3)


def test_ransac_rejects_bad_config():
    with pytest.raises(ValueError):
        ransac_lines(CLUTTER, 0.0)
    with pytest.raises(ValueError):
        ransac_lines(CLUTTER, 1.0, iterations=0)


def test_ransac_pipeline_recovers_clean_track():
    sc = generate_scene(SceneConfig(frames=5, targets=1, clutter_per_frame=0, seed=3))
    cfg = DetectorConfig(method="ransac", ransac=RansacConfig(1000, None, 3, 0))
    # this target moves almost parallel to the y axis, so the swapped pass is needed
    found = find_all_tracks_with_vertical(sc.points, cfg).id_sets()
    assert frozenset(sc.gt.tracks[0].point_ids) in found
    sc = generate_scene(SceneConfig(frames=5, targets=1, clutter_per_frame=0, seed=1))
    assert baseline_detect(sc.points, cfg).id_sets() == {frozenset(sc.gt.tracks[0].point_ids)}


def test_hough_fine_bins_find_line():
    pts = np.column_stack([10 * STEPS + 3, 5 * STEPS + 20])
    assert hough_lines(pts, 512, 180, 5, 1.0)[0] == tuple(range(8))


def test_hough_coarse_angle_bins_miss_line():
    pts = np.column_stack([10 * STEPS + 3, 5 * STEPS + 20])
    assert hough_lines(pts, 512, 4, 5, 1.0) == []


def test_hough_empty_input():
    assert hough_lines(np.empty((0, 2))) == []
    with pytest.raises(ValueError):
        hough_lines(CLUTTER, rho_bins=1)


def test_coarse_hough_misses_planted_tracks_sweep_does_not():
    # 16 clutter points per frame against 4 target points: 80% outliers
    sc = generate_scene(SceneConfig(frames=5, targets=4, clutter_per_frame=16, seed=0))
    gt = [frozenset(t.point_ids) for t in sc.gt.tracks]
    ts = find_all_tracks_with_vertical(sc.points).id_sets()
    coarse = find_all_tracks_with_vertical(
        sc.points, DetectorConfig(method="hough", hough=HoughConfig(64, 8, 20, None))).id_sets()
    assert all(g in ts for g in gt)
    assert sum(g in coarse for g in gt) < len(gt)
