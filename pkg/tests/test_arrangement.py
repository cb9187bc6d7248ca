import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tracksweep.arrangement import (ConsensusState, Kind, OffsetLine, StepEvent,
                                    build_offset_arrangement, cell_witness, elementary_step,
                                    init_sweep, is_report, plane_sweep, run_sweep, topo_sweep,
                                    update_consensus)
from tracksweep.detection import naive_enumerate
from tracksweep.errors import EmptyInput
from tracksweep.geometry import AxisPair, Line2, PointSet

from conftest import random_instance


def _arrays(lines):
    return (np.array([l.line.m for l in lines]), np.array([l.line.c for l in lines]))


def test_offset_lines_single_point():
    lines = build_offset_arrangement(PointSet([2], [5], [1]), eps=1)
    by_kind = {l.kind: l.line for l in lines}
    assert by_kind[Kind.LOWER] == Line2(2, 4)
    assert by_kind[Kind.UPPER] == Line2(2, 6)


def test_offset_lines_sorted_by_slope():
    lines = build_offset_arrangement(PointSet([1, 3], [0, 0], [1, 2]), eps=1)
    assert [l.line.m for l in lines] == [1, 1, 3, 3]


def test_parallel_offset_lines_sorted_by_descending_intercept():
    lines = build_offset_arrangement(PointSet([2, 2], [0, 10], [1, 2]), eps=1)
    assert [l.line.c for l in lines] == [11, 9, 1, -1]


def test_offset_arrangement_rejects_bad_input():
    with pytest.raises(EmptyInput):
        build_offset_arrangement(PointSet([], [], []), eps=1)
    with pytest.raises(ValueError):
        build_offset_arrangement(PointSet([0], [0], [1]), eps=0)


def test_init_single_point_has_one_occupied_region():
    _, cs = init_sweep(build_offset_arrangement(PointSet([2], [5], [1]), eps=1))
    assert cs.C.shape[0] == 3
    assert [cs.members(n) for n in range(3)] == [(), (0,), ()]
    assert list(cs.Z) == [0, 1, 0]


def test_init_two_separated_points():
    _, cs = init_sweep(build_offset_arrangement(PointSet([0, 0.5], [0, 100], [1, 2]), eps=1))
    assert list(cs.Z) == [0, 1, 0, 1, 0]


def _check_rows(cs, frames):
    for n in range(cs.C.shape[0]):
        members = np.flatnonzero(cs.C[n])
        counts = np.bincount(frames[members] - 1, minlength=cs.C_T.shape[1])
        assert np.array_equal(cs.C_T[n], counts)
        assert cs.Z[n] == np.count_nonzero(counts)


def test_two_lines_take_one_step():
    lines = [OffsetLine(0, Kind.UPPER, Line2(0, 1), 1), OffsetLine(1, Kind.LOWER, Line2(1, 0), 2)]
    state, _ = init_sweep(lines)
    # at the far left the smaller slope is on top, so line 0 is p
    assert elementary_step(state) == StepEvent(1, 0, 1)
    assert elementary_step(state) is None
    assert state.step_count == 1


def test_consensus_enter_both_frames_adds_two():
    lines = [OffsetLine(0, Kind.LOWER, Line2(0, 0), 1), OffsetLine(1, Kind.UPPER, Line2(1, 0), 2)]
    cs = ConsensusState(np.zeros((3, 2), dtype=np.uint8), np.zeros((3, 2), dtype=np.int64),
                        np.zeros(3, dtype=np.int64), np.array([1, 2]))
    update_consensus(cs, lines, StepEvent(1, 0, 1))
    assert cs.Z[1] == 2 and cs.members(1) == (0, 1)


def test_consensus_same_frame_swap_keeps_z():
    lines = [OffsetLine(0, Kind.UPPER, Line2(0, 0), 1), OffsetLine(1, Kind.UPPER, Line2(1, 0), 1)]
    frames = np.array([1, 1, 1])
    cs = ConsensusState(np.zeros((3, 3), dtype=np.uint8), np.zeros((3, 1), dtype=np.int64),
                        np.zeros(3, dtype=np.int64), frames)
    cs._enter(1, 0)
    cs._enter(1, 2)
    assert cs.C_T[1, 0] == 2 and cs.Z[1] == 1
    update_consensus(cs, lines, StepEvent(1, 0, 1))
    assert cs.Z[1] == 1 and cs.members(1) == (1, 2)


def _walk(ps, eps):
    """Step-by-step sweep; yields (state, cs, event) after each update."""
    lines = build_offset_arrangement(ps, eps=eps)
    state, cs = init_sweep(lines)
    while True:
        ev = elementary_step(state)
        if ev is None:
            return
        update_consensus(cs, lines, ev)
        yield lines, state, cs, ev


@pytest.mark.parametrize("seed", range(5))
def test_order_stays_permutation_and_rows_consistent(seed):
    ps = random_instance(np.random.default_rng(seed), n_max=12)
    frames = ps.t
    for _, state, cs, _ in _walk(ps, 2.0):
        assert np.array_equal(np.sort(state.order), np.arange(2 * len(ps)))
        _check_rows(cs, frames)


def _strip_members(ps, eps, x0, y0):
    # dual point (x0, y0) is the primal line y = -x0 * x + y0
    r = np.abs(ps.y - (-x0 * ps.x + y0))
    assert np.all(np.abs(r - eps) > 1e-9), "witness too close to a strip boundary"
    return tuple(int(i) for i in np.flatnonzero(r < eps))


def test_cell_rows_match_brute_force_and_count_regions():
    rng = np.random.default_rng(7)
    for _ in range(5):
        n = 8
        ps = PointSet(rng.uniform(0, 20, n), rng.uniform(0, 20, n), rng.integers(1, 4, n))
        eps = 1.5
        lines = build_offset_arrangement(ps, eps=eps)
        m, c = _arrays(lines)
        state, cs = init_sweep(lines)
        seen = set()
        for k in range(1, 2 * n):
            x0, y0 = cell_witness(m, c, -1, k)
            assert cs.members(k) == _strip_members(ps, eps, x0, y0)
            seen.add(tuple(np.sign(y0 - (m * x0 + c)).astype(int)))
        assert cs.members(0) == () and cs.members(2 * n) == ()
        steps = 0
        while (ev := elementary_step(state)) is not None:
            update_consensus(cs, lines, ev)
            steps += 1
            x0, y0 = cell_witness(m, c, ev.p, ev.q)
            assert cs.members(ev.n) == _strip_members(ps, eps, x0, y0)
            seen.add(tuple(np.sign(y0 - (m * x0 + c)).astype(int)))
        # the two unbounded end rows plus every cell found above
        assert len(seen) + 2 == 2 * n * n + 1
        assert steps == 2 * n * n - 2 * n


@pytest.mark.parametrize("n", [3, 7, 15, 40])
def test_step_law(n):
    rng = np.random.default_rng(n)
    x = rng.permutation(np.arange(n, dtype=float) * 1.7)
    ps = PointSet(x, rng.uniform(0, 50, n), rng.integers(1, 6, n))
    assert run_sweep(ps, eps=2.0).n_steps == 2 * n * n - 2 * n
    assert run_sweep(ps, eps=2.0, plane=True).n_steps == 2 * n * n - 2 * n


def test_step_by_step_reports_match_kernel():
    ps = random_instance(np.random.default_rng(11), n_max=14)
    step_reports = {tuple(cs.members(ev.n)) for lines, _, cs, ev in _walk(ps, 2.0)
                    if is_report(lines, ev, cs)}
    kernel = {s.point_ids for s in topo_sweep(ps, eps=2.0)}
    assert step_reports <= kernel


def test_three_collinear_points_one_structure():
    ps = PointSet([0, 1, 2], [0, 1, 2], [1, 2, 3])
    got = topo_sweep(ps, eps=1.0)
    assert [s.point_ids for s in got] == [(0, 1, 2)]


def test_two_points_report_nothing():
    assert topo_sweep(PointSet([0, 1], [0, 1], [1, 2]), eps=1.0) == []


def test_exact_line_with_far_clutter():
    x = np.arange(5, dtype=float)
    # clutter lies far off along a steep direction, so no pair of line points
    # forms a near-collinear triple with it
    cx = np.array([100.0, 300.0, 500.0, 700.0, 900.0])
    ps = PointSet(np.concatenate([x, cx]),
                  np.concatenate([2 * x + 1, -5 * cx + np.array([17, -230, 410, -95, 260])]),
                  [1, 2, 3, 4, 5, 1, 2, 3, 4, 5])
    oracle = naive_enumerate(ps, 0.5, 1e6).id_sets()
    assert max(oracle, key=len) == frozenset(range(5))
    assert all(s <= frozenset(range(5)) for s in oracle)
    got = topo_sweep(ps, eps=0.5)
    assert [s.point_ids for s in got] == [(0, 1, 2, 3, 4)]
    for s in got:
        assert s.max_residual <= 0.5


def test_plane_sweep_single_track():
    ps = PointSet([0, 3, 6, 9], [1, 2, 3, 4], [1, 2, 3, 4])
    assert [s.point_ids for s in plane_sweep(ps, eps=1.0)] == [(0, 1, 2, 3)]


def test_witness_lines_stab_their_structures():
    rng = np.random.default_rng(5)
    for _ in range(10):
        ps = random_instance(rng)
        for s in topo_sweep(ps, eps=2.0):
            assert s.max_residual <= 2.0 + 1e-9
            assert s.distinct_frames >= 3


@pytest.mark.parametrize("axes", [AxisPair.XY, AxisPair.TX])
def test_topo_and_plane_sweep_agree(axes):
    rng = np.random.default_rng(21)
    for _ in range(30):
        ps = random_instance(rng)
        a = {s.point_ids for s in topo_sweep(ps, axes, 2.0, witness=False)}
        b = {s.point_ids for s in plane_sweep(ps, axes, 2.0, witness=False)}
        assert a == b


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 40), st.floats(0, 40), st.integers(1, 4)),
                min_size=1, max_size=14))
def test_sweep_reports_are_stabbed(rows):
    arr = np.asarray(rows, dtype=float)
    ps = PointSet(arr[:, 0], arr[:, 1], arr[:, 2].astype(int))
    for s in topo_sweep(ps, eps=2.0):
        assert s.max_residual <= 2.0 + 1e-6
