import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from tracksweep.errors import DegenerateAbscissa, Parallel
from tracksweep.geometry import (Line2, PointSet, TimedPoint, chebyshev_fit, dual_line_to_point,
                                 dual_point_to_line, intersect_lines, is_feasible,
                                 line_to_dual_point, minimax_residual, point_to_dual_line,
                                 signed_residual)

coord = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


# -- duality -----------------------------------------------------------------

@pytest.mark.parametrize("d, expected", [((2, 3), Line2(2, 3)), ((0, 0), Line2(0, 0)),
                                         ((-1, 5), Line2(-1, 5))])
def test_point_to_dual_line(d, expected):
    assert point_to_dual_line(d) == expected


def test_line_to_dual_point():
    assert line_to_dual_point(Line2(1, 2)) == (-1, 2)
    assert line_to_dual_point(Line2(0, 0)) == (0, 0)


def test_dual_point_round_trip_random_lines():
    rng = np.random.default_rng(3)
    for m, c in rng.normal(scale=50, size=(100, 2)):
        l = Line2(float(m), float(c))
        assert dual_point_to_line(line_to_dual_point(l)) == l


@given(coord, coord)
def test_dual_maps_are_involutions(a, b):
    assert dual_line_to_point(point_to_dual_line((a, b))) == (a, b)
    assert line_to_dual_point(dual_point_to_line((a, b))) == (a, b)


def test_dual_intersection_gives_line_through_both_points():
    p = intersect_lines(point_to_dual_line((0, 0)), point_to_dual_line((1, 1)))
    assert p == (-1, 0)
    assert dual_point_to_line(p) == Line2(1, 0)


def test_intersect_lines():
    with pytest.raises(Parallel):
        intersect_lines(Line2(2, 0), Line2(2, 1))
    assert intersect_lines(Line2(1, 0), Line2(-1, 2)) == (1, 1)


def test_signed_residual_examples():
    assert signed_residual((1, 3), Line2(2, 0)) == 1
    assert signed_residual((1, 2), Line2(2, 0)) == 0


def test_signed_residual_flips_sign_under_duality():
    d, l = (0, 1), Line2(0, 0)
    primal = signed_residual(d, l)
    dual = signed_residual(line_to_dual_point(l), point_to_dual_line(d))
    assert primal == 1 and dual == -1


@given(coord, coord, coord, coord)
def test_residual_distance_preserved_by_duality(x, y, m, c):
    primal = signed_residual((x, y), Line2(m, c))
    dual = signed_residual(line_to_dual_point(Line2(m, c)), point_to_dual_line((x, y)))
    assert math.isclose(primal, -dual, rel_tol=1e-9, abs_tol=1e-6)


# -- minimax fit -------------------------------------------------------------

def test_chebyshev_examples():
    r = chebyshev_fit([(0, 0), (1, 1), (2, 2)])
    assert r.line == Line2(1, 0) and r.max_abs_residual == 0
    r = chebyshev_fit([(0, 0), (1, 2), (2, 0)])
    assert r.line.m == pytest.approx(0) and r.line.c == pytest.approx(1)
    assert r.max_abs_residual == pytest.approx(1)
    assert r.support == (0, 1, 2)
    r = chebyshev_fit([(0, 0), (4, 0)])
    assert r.line.m == pytest.approx(0) and r.line.c == pytest.approx(0)
    assert r.max_abs_residual == pytest.approx(0)


def test_chebyshev_rejects_vertical_sets():
    with pytest.raises(DegenerateAbscissa):
        chebyshev_fit([(1, 0), (1, 5)])
    assert minimax_residual([1.0, 1.0], [0.0, 5.0]) == pytest.approx(2.5)


def _lp_minimax(a, o):
    n = a.size
    A = np.vstack([np.column_stack([a, np.ones(n), -np.ones(n)]),
                   np.column_stack([-a, -np.ones(n), -np.ones(n)])])
    b = np.concatenate([o, -o])
    return linprog([0, 0, 1], A_ub=A, b_ub=b, bounds=[(None, None)] * 3).fun


def test_chebyshev_matches_linear_program():
    rng = np.random.default_rng(1)
    checked = 0
    for _ in range(200):
        n = int(rng.integers(2, 10))
        a = rng.integers(-5, 6, n).astype(float)
        o = rng.normal(size=n) * 3
        if np.all(a == a[0]):
            continue
        fit = chebyshev_fit(np.column_stack([a, o]))
        assert fit.max_abs_residual == pytest.approx(_lp_minimax(a, o), abs=1e-7)
        res = np.abs(o - fit.line.at(a))
        assert res.max() == pytest.approx(fit.max_abs_residual, abs=1e-9)
        checked += 1
    assert checked > 150


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(-20, 20), coord), min_size=3, max_size=12, unique_by=lambda p: p[0]))
def test_minimax_is_monotone_under_subsets(pts):
    arr = np.asarray(pts, dtype=float)
    full = minimax_residual(arr[:, 0], arr[:, 1])
    part = minimax_residual(arr[:-1, 0], arr[:-1, 1])
    assert part <= full + 1e-9 * (1 + abs(full))


# -- feasibility --------------------------------------------------------------

def _pts(rows):
    return [TimedPoint(i, float(x), float(y), int(t)) for i, (t, x, y) in enumerate(rows)]


def test_is_feasible_examples():
    v = is_feasible(_pts([(1, 0, 0), (2, 1, 1), (3, 2, 2)]), 0.1, 0.1)
    assert (v.c1, v.c2, v.c3) == (True, True, True)
    for eps in (0.5, 5.0, 100.0):
        assert not is_feasible(_pts([(1, 0, 0), (1, 5, 5)]), eps, eps).c1
    v = is_feasible(_pts([(1, 0, 0), (2, 1, 0), (3, 5, 0)]), 2.0, 0.5)
    assert v.c1 and v.c2 and not v.c3
    # the minimax (t, x) residual of x = (0, 1, 5) over t = (1, 2, 3) is 0.75
    assert v.residual_tx == pytest.approx(0.75)


def test_is_feasible_swapped_axes_accepts_vertical_track():
    track = _pts([(1, 10, 0), (2, 10, 7), (3, 10, 14)])
    assert not is_feasible(track, 1, 1).c2
    v = is_feasible(track, 1, 1, swap_axes=True)
    assert v.feasible


def test_is_feasible_rejects_bad_eps():
    with pytest.raises(ValueError):
        is_feasible(_pts([(1, 0, 0)]), 0, 1)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 8), coord, coord), min_size=2, max_size=8),
       st.floats(0.1, 50))
def test_feasibility_is_hereditary(rows, eps):
    pts = _pts(rows)
    if is_feasible(pts, eps, eps):
        assert is_feasible(pts[:-1], eps, eps)


def test_pointset_dedupes_and_validates():
    ps = PointSet([0, 0, 1], [0, 0, 1], [1, 1, 2])
    assert len(ps) == 2 and list(ps.kept) == [0, 2]
    with pytest.raises(ValueError):
        PointSet([0], [0], [0])
    with pytest.raises(ValueError):
        PointSet([0], [np.nan], [1])
