"""Offset-line arrangements in dual space and the sweeps that enumerate them.

Each point contributes two parallel dual lines, Lower (ordinate - eps) and
Upper (ordinate + eps); the band between them is the point's strip.  A dual
point inside the strip is a primal line passing within eps of the point, so
every cell of the arrangement carries one consensus set.

Two interfaces are provided:

* a step-by-step one (init_sweep / elementary_step / update_consensus) that
  keeps the dense consensus matrices C, C_T and Z, meant for inspection and
  testing on small inputs;
* topo_sweep / plane_sweep, which run compiled kernels end to end and return
  the reported linear structures.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import _sweepcore as core
from ._fitcore import maximal_mask
from .errors import CorruptState, EmptyInput
from .geometry import AxisPair, Line2, PointSet, dual_point_to_line

_KEY_SEED = 0x7A3C_51D2


class Kind(enum.IntEnum):
    LOWER = core.LOWER
    UPPER = core.UPPER


@dataclass(frozen=True)
class OffsetLine:
    source_id: int
    kind: Kind
    line: Line2
    frame: int


@dataclass(frozen=True)
class StepEvent:
    """One elementary step: row ``n`` sits between the swapped lines.

    ``p`` was above ``q`` on the cut before the step; both are line ids,
    i.e. positions in the sorted offset-line list.
    """

    n: int
    p: int
    q: int


@dataclass(frozen=True)
class LinearStructure:
    point_ids: tuple
    witness_line: Line2 | None
    max_residual: float
    distinct_frames: int


_zobrist = np.empty(0, dtype=np.uint64)


def zobrist_keys(n):
    """Deterministic random 64-bit keys used to hash point-id sets."""
    global _zobrist
    if _zobrist.size < n:
        size = max(n, 2 * _zobrist.size, 1024)
        _zobrist = np.random.default_rng(_KEY_SEED).integers(
            0, np.iinfo(np.uint64).max, size=size, dtype=np.uint64, endpoint=True)
    return _zobrist


def _axes_coords(ps: PointSet, axes: AxisPair):
    a = np.ascontiguousarray(ps.coords(axes.abscissa), dtype=np.float64)
    o = np.ascontiguousarray(ps.coords(axes.ordinate), dtype=np.float64)
    return a, o


def build_offset_arrangement(ps: PointSet, axes: AxisPair = AxisPair.XY, eps: float = 2.0):
    """The 2N offset lines in sweep order.

    Sorted by ascending slope, then descending intercept; identical lines
    put Upper before Lower, then ascending source id.
    """
    if len(ps) == 0:
        raise EmptyInput("no points to build an arrangement from")
    if eps <= 0:
        raise ValueError("eps must be positive")
    a, o = _axes_coords(ps, axes)
    m, c, kind, src = core.offset_lines(a, o, float(eps))
    return [OffsetLine(int(s), Kind(int(k)), Line2(float(mm), float(cc)), int(ps.t[s]))
            for mm, cc, k, s in zip(m, c, kind, src)]


def _line_arrays(lines):
    m = np.array([l.line.m for l in lines], dtype=np.float64)
    c = np.array([l.line.c for l in lines], dtype=np.float64)
    kind = np.array([int(l.kind) for l in lines], dtype=np.int8)
    src = np.array([l.source_id for l in lines], dtype=np.int32)
    return m, c, kind, src


# -- step-by-step sweep -------------------------------------------------------

@dataclass
class SweepState:
    """Cut order, horizon trees and the stack of ready positions.

    For line l: ``ul[l]``/``ur[l]`` are the left/right delimiters of its
    segment in the upper horizon tree and ``ll[l]``/``lr[l]`` those in the
    lower tree (-1 when unbounded).
    """

    L: np.ndarray
    order: np.ndarray
    ur: np.ndarray
    lr: np.ndarray
    ul: np.ndarray
    ll: np.ndarray
    stack_buf: np.ndarray
    meta: np.ndarray

    @property
    def step_count(self):
        return int(self.meta[1])

    @property
    def stack(self):
        return [int(v) for v in self.stack_buf[: self.meta[0]]]

    @property
    def htu(self):
        return self.ul, self.ur

    @property
    def htl(self):
        return self.ll, self.lr


@dataclass
class ConsensusState:
    """Dense per-row consensus: membership C, per-frame counts C_T, and Z.

    Row n is the region between order[n-1] and order[n]; row 0 lies above
    every line and row 2N below every line.  Frame t uses column t - 1.
    """

    C: np.ndarray
    C_T: np.ndarray
    Z: np.ndarray
    frames: np.ndarray = field(repr=False)

    def members(self, n):
        return tuple(int(i) for i in np.flatnonzero(self.C[n]))

    def _enter(self, n, i):
        if not self.C[n, i]:
            self.C[n, i] = 1
            col = self.frames[i] - 1
            if self.C_T[n, col] == 0:
                self.Z[n] += 1
            self.C_T[n, col] += 1

    def _leave(self, n, i):
        if self.C[n, i]:
            self.C[n, i] = 0
            col = self.frames[i] - 1
            self.C_T[n, col] -= 1
            if self.C_T[n, col] == 0:
                self.Z[n] -= 1


def init_sweep(lines):
    """Initial cut (far left), horizon trees, stack, and consensus rows."""
    if not lines:
        raise EmptyInput("no lines")
    m, c, kind, src = _line_arrays(lines)
    n_lines = len(lines)
    n_pts = int(src.max()) + 1
    frames = np.zeros(n_pts, dtype=np.int64)
    for l in lines:
        frames[l.source_id] = l.frame
    L = core.pack_lines(m, c, kind)
    order = np.arange(n_lines, dtype=np.int32)
    ur, lr, ul, ll, stack = (np.empty(n_lines, dtype=np.int32) for _ in range(5))
    meta = np.zeros(2, dtype=np.int64)
    core.init_horizon(L, order, ur, lr, ul, ll, stack, meta)
    state = SweepState(L, order, ur, lr, ul, ll, stack, meta)

    n_frames = int(frames.max())
    cs = ConsensusState(np.zeros((n_lines + 1, n_pts), dtype=np.uint8),
                        np.zeros((n_lines + 1, n_frames), dtype=np.int64),
                        np.zeros(n_lines + 1, dtype=np.int64), frames)
    for k in range(n_lines):
        r = k + 1
        cs.C[r] = cs.C[k]
        cs.C_T[r] = cs.C_T[k]
        cs.Z[r] = cs.Z[k]
        # walking down across an Upper line enters the strip, a Lower leaves
        if kind[k] == core.UPPER:
            cs._enter(r, int(src[k]))
        else:
            cs._leave(r, int(src[k]))
    return state, cs


def elementary_step(state: SweepState):
    """Advance past one vertex; returns the StepEvent or None when done."""
    j = core.ts_step(state.L, state.order, state.ur, state.lr, state.ul, state.ll,
                     state.stack_buf, state.meta)
    if j == -1:
        return None
    if j == -2:
        raise CorruptState("popped a pair of lines that are not adjacent")
    return StepEvent(int(j) + 1, int(state.order[j + 1]), int(state.order[j]))


def update_consensus(cs: ConsensusState, lines, ev: StepEvent):
    """Apply the crossing of ``ev`` to row ``ev.n`` (in place; returns cs)."""
    p, q = lines[ev.p], lines[ev.q]
    if p.kind is Kind.UPPER:
        cs._leave(ev.n, p.source_id)
    if q.kind is Kind.LOWER:
        cs._leave(ev.n, q.source_id)
    if p.kind is Kind.LOWER:
        cs._enter(ev.n, p.source_id)
    if q.kind is Kind.UPPER:
        cs._enter(ev.n, q.source_id)
    return cs


def is_report(lines, ev: StepEvent, cs: ConsensusState, min_frames=3):
    return (lines[ev.p].kind is Kind.LOWER and lines[ev.q].kind is Kind.UPPER
            and cs.Z[ev.n] >= min_frames)


# -- compiled sweeps ----------------------------------------------------------

@dataclass
class SweepRun:
    structures: list
    n_steps: int
    n_lines: int


def _vertex_abscissa(m, c, u, v):
    return (c[v] - c[u]) / (m[u] - m[v])


def _crossings(m, c, u):
    """Abscissas where line u meets every non-parallel line."""
    dm = m[u] - m
    ok = dm != 0.0
    xs = np.full(m.shape, np.nan)
    with np.errstate(over="ignore"):
        xs[ok] = (c[ok] - c[u]) / dm[ok]
    return xs


def cell_witness(m, c, p, q):
    """Dual point inside the cell entered at the vertex of lines p and q.

    ``p == -1`` denotes the left-unbounded region just above line q on the
    initial cut.  The point is placed halfway from the vertex to the next
    vertex on either bounding line, midway between the two lines.
    """
    if p < 0:
        upper, lower = q - 1, q
        xs = np.concatenate([_crossings(m, c, upper), _crossings(m, c, lower)])
        xs = xs[np.isfinite(xs)]
        x0 = (xs.min() if xs.size else 0.0) - 1.0
    else:
        upper, lower = q, p
        vx = _vertex_abscissa(m, c, p, q)
        xs = np.concatenate([_crossings(m, c, p), _crossings(m, c, q)])
        xs = xs[np.isfinite(xs) & (xs > vx)]
        step = 0.5 * (xs.min() - vx) if xs.size else 1.0
        if step <= 0.0:
            step = 1e-9 * (1.0 + abs(vx))
        x0 = vx + step
    y0 = 0.5 * ((m[upper] * x0 + c[upper]) + (m[lower] * x0 + c[lower]))
    return x0, y0


def run_sweep(ps: PointSet, axes: AxisPair = AxisPair.XY, eps: float = 2.0,
              min_frames: int = 3, plane: bool = False, witness: bool = True) -> SweepRun:
    """Sweep the offset arrangement and return the reported structures.

    Reports are deduplicated, and a report strictly contained in another is
    dropped: the entry test only looks at the cell's left vertex, so cells
    inside a larger overlap are reported too.
    """
    if len(ps) == 0:
        raise EmptyInput("no points to sweep")
    if eps <= 0:
        raise ValueError("eps must be positive")
    if min_frames < 1:
        raise ValueError("min_frames must be positive")
    a, o = _axes_coords(ps, axes)
    keys = zobrist_keys(len(ps))
    rep_off, rep_mem, rep_p, rep_q, _, n_steps, status = core.sweep_points(
        a, o, ps.t, float(eps), int(min_frames), keys, bool(plane))
    if status != 0:
        raise CorruptState("sweep kernel reported an inconsistent state")
    keep = maximal_mask(rep_off.astype(np.int64), rep_mem.astype(np.int32), len(ps))
    m = c = None
    if witness:
        m, c, _, _ = core.offset_lines(a, o, float(eps))
    out = []
    for k in np.flatnonzero(keep):
        ids = np.sort(rep_mem[rep_off[k]:rep_off[k + 1]])
        wl = None
        worst = float("nan")
        if witness:
            x0, y0 = cell_witness(m, c, int(rep_p[k]), int(rep_q[k]))
            wl = dual_point_to_line((x0, y0))
            worst = float(np.max(np.abs(o[ids] - (wl.m * a[ids] + wl.c))))
        out.append(LinearStructure(tuple(int(i) for i in ids), wl, worst,
                                   int(np.unique(ps.t[ids]).size)))
    return SweepRun(out, int(n_steps), 2 * len(ps))


def topo_sweep(ps: PointSet, axes: AxisPair = AxisPair.XY, eps: float = 2.0,
               min_frames: int = 3, witness: bool = True):
    """All reported structures, enumerated by topological sweep."""
    return run_sweep(ps, axes, eps, min_frames, plane=False, witness=witness).structures


def plane_sweep(ps: PointSet, axes: AxisPair = AxisPair.XY, eps: float = 2.0,
                min_frames: int = 3, witness: bool = True):
    """Same contract as topo_sweep, visiting vertices in abscissa order."""
    return run_sweep(ps, axes, eps, min_frames, plane=True, witness=witness).structures
