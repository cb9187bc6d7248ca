"""Track detection: two-tier sweep solver, vertical pass, oracle and baselines.

Tier 1 finds every maximal point set that one line passes within eps1 of in
(x, y).  Tier 2 sweeps each of those sets again in (t, x) with eps2.  The
surviving sets may still hold several points of one frame, so each is split
into its maximal one-point-per-frame subsets that keep both minimax fits
within tolerance.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import _fitcore, _sweepcore
from .arrangement import zobrist_keys
from .baselines import hough_lines, ransac_lines
from .errors import CorruptState, EmptyInput, TooLarge
from .geometry import FEASIBILITY_TOL, Line2, PointSet, is_feasible

log = logging.getLogger(__name__)

METHODS = ("ts", "ps", "ransac", "hough", "naive")
NAIVE_LIMIT = 1e7
THREADS_ENV = "TRACKSWEEP_THREADS"


@dataclass(frozen=True)
class Track:
    """A feasible track.

    ``point_ids`` are ordered by frame.  For a track from the swapped pass
    (``axis_swapped``) the fits are in swapped axes: line_xy is x as a
    function of y and line_tx is y as a function of t.
    """

    point_ids: tuple
    line_xy: Line2
    line_tx: Line2
    residual_xy: float
    residual_tx: float
    axis_swapped: bool = False

    def __len__(self):
        return len(self.point_ids)

    def to_dict(self):
        return {
            "point_ids": [int(i) for i in self.point_ids],
            "line_xy": self.line_xy.to_dict(),
            "line_tx": self.line_tx.to_dict(),
            "residual_xy": float(self.residual_xy),
            "residual_tx": float(self.residual_tx),
            "axis_swapped": bool(self.axis_swapped),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(int(i) for i in d["point_ids"]),
                   Line2(float(d["line_xy"]["m"]), float(d["line_xy"]["c"])),
                   Line2(float(d["line_tx"]["m"]), float(d["line_tx"]["c"])),
                   float(d["residual_xy"]), float(d["residual_tx"]),
                   bool(d.get("axis_swapped", False)))


@dataclass
class TrackSet:
    tracks: list = field(default_factory=list)
    params: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.tracks)

    def __iter__(self):
        return iter(self.tracks)

    def id_sets(self):
        return {frozenset(t.point_ids) for t in self.tracks}

    def to_dict(self):
        return {"tracks": [t.to_dict() for t in self.tracks], "params": dict(self.params)}

    @classmethod
    def from_dict(cls, d):
        return cls([Track.from_dict(t) for t in d["tracks"]], dict(d.get("params", {})))


@dataclass(frozen=True)
class TopK:
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("TopK needs k >= 1")


@dataclass(frozen=True)
class Threshold:
    tr: int

    def __post_init__(self):
        if self.tr < 3:
            raise ValueError("Threshold needs tr >= 3")


def parse_selection(text):
    """'all', 'topk:K' or 'thresh:Tr'."""
    text = text.strip().lower()
    if text == "all":
        return None
    name, _, val = text.partition(":")
    if name == "topk":
        return TopK(int(val))
    if name in ("thresh", "threshold"):
        return Threshold(int(val))
    raise ValueError(f"unknown selection {text!r}")


@dataclass(frozen=True)
class RansacConfig:
    iterations: int = 1000
    inlier_eps: float | None = None
    min_inliers: int = 3
    seed: int = 0


@dataclass(frozen=True)
class HoughConfig:
    rho_bins: int = 1024
    theta_bins: int = 180
    peak_count: int = 20
    inlier_eps: float | None = None


@dataclass(frozen=True)
class DetectorConfig:
    eps1: float = 2.0
    eps2: float = 2.0
    min_frames: int = 3
    method: str = "ts"
    selection: TopK | Threshold | None = None
    ransac: RansacConfig = RansacConfig()
    hough: HoughConfig = HoughConfig()
    node_cap: int = 200_000
    check: bool = False

    def __post_init__(self):
        if not (self.eps1 > 0 and self.eps2 > 0):
            raise ValueError("eps1 and eps2 must be positive")
        if self.min_frames < 3:
            raise ValueError("min_frames must be at least 3")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.node_cap < 1:
            raise ValueError("node_cap must be positive")

    def params(self):
        # the method is left out on purpose: ts and ps must give identical output
        return {"eps1": self.eps1, "eps2": self.eps2, "min_frames": self.min_frames}


def thread_count():
    """Worker count from TRACKSWEEP_THREADS; 0 or unset means sequential."""
    raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return max(0, n)


# -- shared tier-2 stage -------------------------------------------------------

def _csr(sets):
    off = np.zeros(len(sets) + 1, dtype=np.int64)
    for k, s in enumerate(sets):
        off[k + 1] = off[k] + len(s)
    mem = np.fromiter((i for s in sets for i in s), dtype=np.int32, count=int(off[-1]))
    return off, mem


def _tier2(off, mem, t, x, frames, eps2, min_frames, plane):
    """Second sweep over every structure, optionally split across threads."""
    keys = zobrist_keys(t.size)
    n_struct = off.size - 1
    workers = thread_count()
    if workers <= 1 or n_struct < 2 * workers:
        o, m, _, status = _sweepcore.tier2_batch(off, mem, t, x, frames, eps2, min_frames, keys, plane)
        if status:
            raise CorruptState("second-tier sweep reported an inconsistent state")
        return o, m
    bounds = np.linspace(0, n_struct, workers + 1).astype(np.int64)

    def run(k):
        a, b = bounds[k], bounds[k + 1]
        sub_off = off[a:b + 1] - off[a]
        sub_mem = mem[off[a]:off[b]]
        return _sweepcore.tier2_batch(sub_off, sub_mem, t, x, frames, eps2, min_frames, keys, plane)

    with ThreadPoolExecutor(workers) as pool:
        parts = list(pool.map(run, range(workers)))
    if any(p[3] for p in parts):
        raise CorruptState("second-tier sweep reported an inconsistent state")
    sizes = [p[0][-1] for p in parts]
    shifts = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    o = np.concatenate([[0]] + [p[0][1:] + s for p, s in zip(parts, shifts)]).astype(np.int64)
    m = np.concatenate([p[1] for p in parts]).astype(np.int32)
    return o, m


def _assemble(off, mem, ps: PointSet, cfg: DetectorConfig, swapped: bool, plane: bool):
    """(x, y) structures -> tier 2 in (t, x) -> maximal tracks."""
    absc, ordi = (ps.y, ps.x) if swapped else (ps.x, ps.y)
    absc = np.ascontiguousarray(absc, dtype=np.float64)
    ordi = np.ascontiguousarray(ordi, dtype=np.float64)
    tt = ps.t.astype(np.float64)
    frames = np.ascontiguousarray(ps.t, dtype=np.int64)
    o2, m2 = _tier2(off, mem, tt, absc, frames, float(cfg.eps2), cfg.min_frames, plane)
    t_off, t_mem, fits, n_cut = _fitcore.collect_tracks(
        o2, m2, absc, ordi, tt, absc, frames, float(cfg.eps1), float(cfg.eps2),
        FEASIBILITY_TOL, zobrist_keys(len(ps)), cfg.min_frames, cfg.node_cap)
    if n_cut:
        log.warning("%d structure(s) hit the search cap of %d nodes", n_cut, cfg.node_cap)
    keep = _fitcore.maximal_mask(t_off, t_mem, len(ps))
    tracks = []
    for k in np.flatnonzero(keep):
        ids = t_mem[t_off[k]:t_off[k + 1]]
        ids = ids[np.argsort(ps.t[ids], kind="stable")]
        f = fits[k]
        tracks.append(Track(tuple(int(i) for i in ids), Line2(f[0], f[1]), Line2(f[3], f[4]),
                            float(f[2]), float(f[5]), swapped))
    return tracks, int(n_cut)


def _canonical(tracks):
    """Drop repeated point sets (first occurrence wins) and sort canonically."""
    seen = {}
    for tr in tracks:
        key = tuple(sorted(tr.point_ids))
        if key not in seen:
            seen[key] = tr
    return [seen[k] for k in sorted(seen, key=lambda k: (len(k), k))]


def _finish(tracks, ps, cfg, extra=None):
    tracks = _canonical(tracks)
    if cfg.check:
        for tr in tracks:
            verdict = is_feasible([ps[i] for i in tr.point_ids], cfg.eps1, cfg.eps2,
                                  swap_axes=tr.axis_swapped)
            if not verdict:
                raise AssertionError(f"infeasible track {tr.point_ids}: {verdict}")
    params = cfg.params()
    if extra:
        params.update(extra)
    ts = TrackSet(tracks, params)
    if cfg.selection is not None:
        ts = select_tracks(ts, cfg.selection, cfg.eps1, cfg.eps2)
    return ts


# -- public entry points ---------------------------------------------------------

def _sweep_tracks(ps, cfg, swapped):
    plane = cfg.method == "ps"
    absc, ordi = (ps.y, ps.x) if swapped else (ps.x, ps.y)
    absc = np.ascontiguousarray(absc, dtype=np.float64)
    ordi = np.ascontiguousarray(ordi, dtype=np.float64)
    off, mem, _, _, _, _, status = _sweepcore.sweep_points_gated(
        absc, ordi, np.ascontiguousarray(ps.t, dtype=np.int64), ps.t.astype(np.float64),
        float(cfg.eps1), float(cfg.eps2), cfg.min_frames, zobrist_keys(len(ps)), plane)
    if status:
        raise CorruptState("first-tier sweep reported an inconsistent state")
    return _assemble(off, mem, ps, cfg, swapped, plane)


def _run_pass(ps, cfg, swapped):
    if cfg.method in ("ts", "ps"):
        return _sweep_tracks(ps, cfg, swapped)
    if cfg.method == "naive":
        src = ps.swapped() if swapped else ps
        found = naive_enumerate(src, cfg.eps1, cfg.eps2, cfg.min_frames)
        return [replace(t, axis_swapped=swapped) for t in found.tracks], 0
    return _baseline_tracks(ps, cfg, swapped)


def _check_input(ps, cfg):
    if len(ps) == 0:
        raise EmptyInput("no points to detect tracks in")
    if not isinstance(cfg, DetectorConfig):
        raise TypeError("cfg must be a DetectorConfig")


def find_all_tracks(ps: PointSet, cfg: DetectorConfig = DetectorConfig()) -> TrackSet:
    """Every maximal feasible track reachable without swapping axes."""
    _check_input(ps, cfg)
    tracks, n_cut = _run_pass(ps, cfg, False)
    return _finish(tracks, ps, cfg, {"vertical_pass": False, "truncated": n_cut})


def find_all_tracks_with_vertical(ps: PointSet, cfg: DetectorConfig = DetectorConfig()) -> TrackSet:
    """Union of the plain pass and a pass on the x/y-swapped points.

    Tracks found by both passes keep the plain-pass version.
    """
    _check_input(ps, cfg)
    plain, cut_a = _run_pass(ps, cfg, False)
    swapped, cut_b = _run_pass(ps, cfg, True)
    return _finish(plain + swapped, ps, cfg, {"vertical_pass": True, "truncated": cut_a + cut_b})


def swapped_pass(ps: PointSet, cfg: DetectorConfig = DetectorConfig()) -> TrackSet:
    """Only the swapped-axis pass (near-vertical tracks)."""
    _check_input(ps, cfg)
    tracks, n_cut = _run_pass(ps, cfg, True)
    return _finish(tracks, ps, cfg, {"vertical_pass": True, "truncated": n_cut})


# -- exhaustive oracle -------------------------------------------------------------

def naive_subset_estimate(ps: PointSet):
    """Number of one-point-per-frame subsets, prod over frames of (n_t + 1)."""
    if len(ps) == 0:
        return 1.0
    _, counts = np.unique(ps.t, return_counts=True)
    return float(np.prod(counts.astype(np.float64) + 1.0))


def naive_enumerate(ps: PointSet, eps1: float, eps2: float, min_len: int = 3,
                    limit: float = NAIVE_LIMIT) -> TrackSet:
    """All subsets with distinct frames, at least ``min_len`` points, and
    minimax residuals within eps1 in (x, y) and eps2 in (t, x).

    Subsets are grown frame by frame; since a superset of an infeasible set
    is infeasible, those branches are not extended.
    """
    if eps1 <= 0 or eps2 <= 0:
        raise ValueError("eps1 and eps2 must be positive")
    est = naive_subset_estimate(ps)
    if est > limit:
        raise TooLarge(est, limit)
    frames = np.unique(ps.t)
    groups = [np.flatnonzero(ps.t == f) for f in frames]
    x, y, t = ps.x, ps.y, ps.t.astype(np.float64)
    out = []

    def ok(ids):
        if len(ids) < 2:
            return True
        idx = np.array(ids)
        r1 = _fitcore.cheb_fit(np.ascontiguousarray(x[idx]), np.ascontiguousarray(y[idx]))[2]
        if not _fitcore.within(r1, eps1, FEASIBILITY_TOL):
            return False
        r2 = _fitcore.cheb_fit(np.ascontiguousarray(t[idx]), np.ascontiguousarray(x[idx]))[2]
        return _fitcore.within(r2, eps2, FEASIBILITY_TOL)

    def grow(g, ids):
        if g == len(groups):
            if len(ids) >= min_len:
                out.append(tuple(ids))
            return
        if len(ids) + len(groups) - g < min_len:
            return
        for i in groups[g]:
            ids.append(int(i))
            if ok(ids):
                grow(g + 1, ids)
            ids.pop()
        grow(g + 1, ids)

    grow(0, [])
    tracks = []
    for ids in out:
        idx = np.array(ids)
        m1, c1, r1, _ = _fitcore.cheb_fit(np.ascontiguousarray(x[idx]), np.ascontiguousarray(y[idx]))
        m2, c2, r2, _ = _fitcore.cheb_fit(np.ascontiguousarray(t[idx]), np.ascontiguousarray(x[idx]))
        tracks.append(Track(ids, Line2(m1, c1), Line2(m2, c2), float(r1), float(r2)))
    return TrackSet(_canonical(tracks), {"eps1": eps1, "eps2": eps2, "min_frames": min_len})


# -- baseline pipeline ----------------------------------------------------------

def baseline_structures(ps: PointSet, cfg: DetectorConfig, swapped: bool = False):
    """Point-id sets found by the configured classic line finder."""
    if len(ps) == 0:
        return []
    xy = np.column_stack([ps.y, ps.x] if swapped else [ps.x, ps.y])
    if cfg.method == "ransac":
        rc = cfg.ransac
        return ransac_lines(xy, rc.inlier_eps or cfg.eps1, rc.iterations, rc.min_inliers, rc.seed)
    if cfg.method == "hough":
        hc = cfg.hough
        return hough_lines(xy, hc.rho_bins, hc.theta_bins, hc.peak_count, hc.inlier_eps or cfg.eps1)
    raise ValueError(f"{cfg.method!r} is not a baseline method")


def _baseline_tracks(ps, cfg, swapped):
    sets = [s for s in baseline_structures(ps, cfg, swapped) if len(s) >= cfg.min_frames]
    if not sets:
        return [], 0
    off, mem = _csr(sets)
    return _assemble(off, mem, ps, cfg, swapped, False)


def baseline_detect(ps: PointSet, cfg: DetectorConfig) -> TrackSet:
    """Line finder structures, then the same (t, x) stage as the sweep solver."""
    if cfg.method not in ("ransac", "hough"):
        raise ValueError("baseline_detect needs method 'ransac' or 'hough'")
    if len(ps) == 0:
        return TrackSet([], cfg.params())
    tracks, n_cut = _baseline_tracks(ps, cfg, False)
    return _finish(tracks, ps, cfg, {"vertical_pass": False, "truncated": n_cut})


# -- selection -------------------------------------------------------------------

def _quality(tr: Track, eps1, eps2):
    return max(tr.residual_xy / eps1, tr.residual_tx / eps2)


def select_tracks(ts: TrackSet, selection, eps1=None, eps2=None) -> TrackSet:
    """Keep the K longest tracks or those longer than Tr, without contained ones.

    Ordering is by length (descending), then normalised residual, then the
    sorted point ids.  A track whose points all belong to an already kept
    longer track is dropped.
    """
    if selection is None:
        return ts
    eps1 = eps1 or ts.params.get("eps1", 1.0)
    eps2 = eps2 or ts.params.get("eps2", 1.0)
    ranked = sorted(ts.tracks, key=lambda tr: (-len(tr), _quality(tr, eps1, eps2),
                                                tuple(sorted(tr.point_ids))))
    if isinstance(selection, Threshold):
        ranked = [tr for tr in ranked if len(tr) > selection.tr]
    limit = selection.k if isinstance(selection, TopK) else math.inf
    kept, kept_sets = [], []
    for tr in ranked:
        if len(kept) >= limit:
            break
        s = frozenset(tr.point_ids)
        if any(len(k) > len(s) and s < k for k in kept_sets):
            continue
        kept.append(tr)
        kept_sets.append(s)
    params = dict(ts.params)
    params["selection"] = (f"topk:{selection.k}" if isinstance(selection, TopK)
                           else f"thresh:{selection.tr}")
    return TrackSet(kept, params)
