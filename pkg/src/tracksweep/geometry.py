"""Points, lines, point-line duality and minimax line fitting.

A point (x, y) maps to the dual line q = x*p + y, and a line y = m*x + c maps
to the dual point (-m, c).  Vertical residuals keep their magnitude across
the map but flip sign.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import _fitcore
from .errors import DegenerateAbscissa, Parallel

log = logging.getLogger(__name__)

FEASIBILITY_TOL = 1e-9


@dataclass(frozen=True)
class TimedPoint:
    id: int
    x: float
    y: float
    t: int


@dataclass(frozen=True)
class Line2:
    """Line ``ordinate = m * abscissa + c`` in whichever axes it is used."""

    m: float
    c: float

    def __post_init__(self):
        if not (math.isfinite(self.m) and math.isfinite(self.c)):
            raise ValueError(f"line coefficients must be finite, got m={self.m}, c={self.c}")

    def at(self, abscissa):
        return self.m * abscissa + self.c

    def to_dict(self):
        return {"m": float(self.m), "c": float(self.c)}


class Axis(enum.Enum):
    X = "x"
    Y = "y"
    T = "t"


class AxisPair(enum.Enum):
    """The two coordinate pairs a sweep can run on."""

    XY = (Axis.X, Axis.Y)
    TX = (Axis.T, Axis.X)

    @property
    def abscissa(self):
        return self.value[0]

    @property
    def ordinate(self):
        return self.value[1]


class PointSet:
    """Time-indexed detections stored column-wise.

    Points are identified by their row index.  Exact (x, y, t) duplicates are
    dropped at construction with a warning; ``kept`` maps each stored row to
    its index in the original input.
    """

    def __init__(self, x, y, t, dedupe=True):
        x = np.asarray(x, dtype=np.float64).reshape(-1)
        y = np.asarray(y, dtype=np.float64).reshape(-1)
        t_raw = np.asarray(t).reshape(-1)
        if not (x.shape == y.shape == t_raw.shape):
            raise ValueError("x, y and t must have equal length")
        if t_raw.size and not np.all(np.asarray(t_raw, dtype=np.float64) == np.round(np.asarray(t_raw, dtype=np.float64))):
            raise ValueError("frame indices must be integers")
        t = t_raw.astype(np.int64)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("coordinates must be finite")
        if t.size and t.min() < 1:
            raise ValueError("frame indices start at 1")
        kept = np.arange(x.size)
        if dedupe and x.size:
            _, first = np.unique(np.stack([x, y, t.astype(np.float64)], axis=1), axis=0, return_index=True)
            if first.size < x.size:
                first.sort()
                log.warning("dropped %d duplicate point(s)", x.size - first.size)
                kept = first
                x, y, t = x[first], y[first], t[first]
        self.x = x
        self.y = y
        self.t = t
        self.kept = kept
        for arr in (self.x, self.y, self.t):
            arr.setflags(write=False)

    @classmethod
    def from_points(cls, points: Iterable[TimedPoint | Sequence]):
        """Build from TimedPoints (ordered by id) or (t, x, y) triples."""
        rows = []
        for p in points:
            if isinstance(p, TimedPoint):
                rows.append((p.t, p.x, p.y))
            else:
                t, x, y = p
                rows.append((t, x, y))
        if not rows:
            return cls(np.empty(0), np.empty(0), np.empty(0, dtype=np.int64))
        arr = np.asarray(rows, dtype=np.float64)
        return cls(arr[:, 1], arr[:, 2], arr[:, 0])

    def __len__(self):
        return self.x.size

    @property
    def frame_count(self):
        return int(self.t.max()) if self.t.size else 0

    @property
    def points(self):
        return [TimedPoint(i, float(self.x[i]), float(self.y[i]), int(self.t[i]))
                for i in range(len(self))]

    def __getitem__(self, i):
        return TimedPoint(int(i), float(self.x[i]), float(self.y[i]), int(self.t[i]))

    def coords(self, axis: Axis):
        if axis is Axis.X:
            return self.x
        if axis is Axis.Y:
            return self.y
        return self.t.astype(np.float64)

    def swapped(self):
        """Copy with x and y exchanged (same ids, same frames)."""
        out = PointSet(self.y, self.x, self.t, dedupe=False)
        out.kept = self.kept
        return out

    def subset(self, ids):
        ids = np.asarray(ids, dtype=np.int64)
        out = PointSet(self.x[ids], self.y[ids], self.t[ids], dedupe=False)
        out.kept = ids
        return out

    def __eq__(self, other):
        if not isinstance(other, PointSet):
            return NotImplemented
        return (np.array_equal(self.x, other.x) and np.array_equal(self.y, other.y)
                and np.array_equal(self.t, other.t))

    def __repr__(self):
        return f"PointSet(n={len(self)}, frames={self.frame_count})"


@dataclass(frozen=True)
class FitResult:
    line: Line2
    max_abs_residual: float
    support: tuple = ()


@dataclass(frozen=True)
class FeasibilityVerdict:
    c1: bool
    c2: bool
    c3: bool
    residual_xy: float = 0.0
    residual_tx: float = 0.0

    @property
    def feasible(self):
        return self.c1 and self.c2 and self.c3

    def __bool__(self):
        return self.feasible


# -- duality ---------------------------------------------------------------

def point_to_dual_line(d) -> Line2:
    x, y = d
    return Line2(float(x), float(y))


def dual_line_to_point(ell: Line2):
    """Inverse of point_to_dual_line."""
    return (ell.m, ell.c)


def line_to_dual_point(l: Line2):
    return (-l.m, l.c)


def dual_point_to_line(delta) -> Line2:
    """Inverse of line_to_dual_point."""
    p, q = delta
    return Line2(-float(p), float(q))


def intersect_lines(la: Line2, lb: Line2):
    if la.m == lb.m:
        raise Parallel(f"lines with slope {la.m} do not meet in a single point")
    p = (lb.c - la.c) / (la.m - lb.m)
    return (p, la.m * p + la.c)


def signed_residual(d, l: Line2) -> float:
    a, o = d
    return o - (l.m * a + l.c)


# -- minimax fitting --------------------------------------------------------

def chebyshev_fit(points) -> FitResult:
    """Line minimising the largest vertical residual over ``points``.

    ``points`` is a sequence of (abscissa, ordinate) pairs or an (n, 2) array.
    ``support`` lists the indices (into ``points``) of up to three points at
    the maximal residual.
    """
    arr = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if arr.shape[0] < 2:
        raise ValueError("need at least two points")
    a = np.ascontiguousarray(arr[:, 0])
    o = np.ascontiguousarray(arr[:, 1])
    m, c, r, degenerate = _fitcore.cheb_fit(a, o)
    if degenerate:
        raise DegenerateAbscissa("all points share the abscissa %r" % float(a[0]))
    res = np.abs(o - (m * a + c))
    # support: the points attaining the maximum, at most three
    near = np.flatnonzero(res >= r - 1e-9 * (1.0 + r))
    near = near[np.argsort(-res[near], kind="stable")][:3]
    return FitResult(Line2(float(m), float(c)), float(r), tuple(int(i) for i in np.sort(near)))


def minimax_residual(abscissa, ordinate) -> float:
    """Best achievable max residual; handles the all-equal-abscissa case."""
    a = np.ascontiguousarray(abscissa, dtype=np.float64)
    o = np.ascontiguousarray(ordinate, dtype=np.float64)
    if a.size < 2:
        return 0.0
    return float(_fitcore.cheb_fit(a, o)[2])


def within_tolerance(residual, eps, tol=FEASIBILITY_TOL):
    return residual <= eps + tol * (1.0 + eps)


def is_feasible(track, eps1, eps2, swap_axes=False, tol=FEASIBILITY_TOL) -> FeasibilityVerdict:
    """Check the three track conditions for a sequence of TimedPoints.

    c1: frames distinct; c2: minimax (x, y) residual within eps1; c3: minimax
    (t, x) residual within eps2.  With ``swap_axes`` the roles of x and y are
    exchanged, which is how near-vertical tracks are judged.  Residuals are
    compared with a relative slack of ``tol``.
    """
    if eps1 <= 0 or eps2 <= 0:
        raise ValueError("eps1 and eps2 must be positive")
    pts = list(track)
    if len(pts) <= 1:
        return FeasibilityVerdict(True, True, True)
    t = np.array([p.t for p in pts], dtype=np.float64)
    x = np.array([p.x for p in pts], dtype=np.float64)
    y = np.array([p.y for p in pts], dtype=np.float64)
    if swap_axes:
        x, y = y, x
    c1 = np.unique(t).size == t.size
    r_xy = minimax_residual(x, y)
    r_tx = minimax_residual(t, x)
    return FeasibilityVerdict(bool(c1), within_tolerance(r_xy, eps1, tol),
                              within_tolerance(r_tx, eps2, tol), r_xy, r_tx)


def line_from_two_points(p1, p2) -> Line2:
    (x1, y1), (x2, y2) = p1, p2
    if x1 == x2:
        raise Parallel("points share an abscissa; the line through them is vertical")
    m = (y2 - y1) / (x2 - x1)
    return Line2(m, y1 - m * x1)
