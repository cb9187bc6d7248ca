"""Detection scoring at track and point level, and the runtime benchmark.

Matching is many-to-many: a point matches a track when some point of the
track lies within lambda of it, with no one-to-one assignment.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial import cKDTree

from .detection import (DetectorConfig, TrackSet, find_all_tracks,
                        find_all_tracks_with_vertical, naive_subset_estimate, NAIVE_LIMIT)
from .synthetic import SceneConfig, generate_scene

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MatchConfig:
    lam: float = 3.0

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lambda must be positive")


@dataclass(frozen=True)
class CountSet:
    tp: int
    fn_: int
    fp: int
    level: str

    def __post_init__(self):
        if min(self.tp, self.fn_, self.fp) < 0:
            raise ValueError("counts must be non-negative")

    def __add__(self, other):
        if other.level != self.level:
            raise ValueError("cannot add counts of different levels")
        return CountSet(self.tp + other.tp, self.fn_ + other.fn_, self.fp + other.fp, self.level)


def ratios(tp, fn_, fp):
    """(recall, precision, f1, degenerate); zero denominators give 0."""
    degenerate = (tp + fn_ == 0) or (tp + fp == 0)
    recall = tp / (tp + fn_) if tp + fn_ else 0.0
    precision = tp / (tp + fp) if tp + fp else 0.0
    f1 = 2 * recall * precision / (recall + precision) if recall + precision else 0.0
    return recall, precision, f1, degenerate


@dataclass
class MetricsReport:
    tau: CountSet
    d: CountSet
    runtime_seconds: float = 0.0

    def level(self, name):
        cs = self.tau if name == "tau" else self.d
        return ratios(cs.tp, cs.fn_, cs.fp)

    @property
    def recall_tau(self):
        return self.level("tau")[0]

    @property
    def precision_tau(self):
        return self.level("tau")[1]

    @property
    def f1_tau(self):
        return self.level("tau")[2]

    @property
    def recall_d(self):
        return self.level("d")[0]

    @property
    def precision_d(self):
        return self.level("d")[1]

    @property
    def f1_d(self):
        return self.level("d")[2]

    def __add__(self, other):
        return MetricsReport(self.tau + other.tau, self.d + other.d,
                             self.runtime_seconds + other.runtime_seconds)

    def to_dict(self):
        out = {"runtime_seconds": self.runtime_seconds}
        for name, cs in (("tau", self.tau), ("d", self.d)):
            r, p, f, degenerate = ratios(cs.tp, cs.fn_, cs.fp)
            out[name] = {"tp": cs.tp, "fn": cs.fn_, "fp": cs.fp, "recall": r,
                         "precision": p, "f1": f, "zero_denominator": degenerate}
        return out

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def aggregate(reports):
    """Sum counts over sequences; ratios of the totals follow."""
    reports = list(reports)
    if not reports:
        return MetricsReport(CountSet(0, 0, 0, "tau"), CountSet(0, 0, 0, "d"))
    total = reports[0]
    for r in reports[1:]:
        total = total + r
    return total


def point_match(d1, d2, cfg: MatchConfig = MatchConfig()) -> int:
    return int(math.hypot(d1[0] - d2[0], d1[1] - d2[1]) <= cfg.lam)


def track_match(d, tau, cfg: MatchConfig = MatchConfig()) -> int:
    """1 when some point of ``tau`` (a sequence of 2D points) matches ``d``."""
    return int(any(point_match(d, p, cfg) for p in tau))


def _coords(ts: TrackSet, xy):
    return [xy[np.asarray(t.point_ids, dtype=np.int64)] if len(t.point_ids) else np.empty((0, 2))
            for t in ts.tracks]


def _hits(points, tracks, lam):
    """hits[i, k]: point i matches track k."""
    out = np.zeros((points.shape[0], len(tracks)), dtype=bool)
    if points.shape[0] == 0:
        return out
    for k, tr in enumerate(tracks):
        if tr.shape[0]:
            dist, _ = cKDTree(tr).query(points, k=1)
            out[:, k] = dist <= lam
    return out


def score_coords(gt_tracks, pred_tracks, cfg: MatchConfig = MatchConfig()) -> MetricsReport:
    """Score tracks given directly as lists of (n_k, 2) coordinate arrays."""
    gt_tracks = [np.asarray(t, dtype=np.float64).reshape(-1, 2) for t in gt_tracks]
    pred_tracks = [np.asarray(t, dtype=np.float64).reshape(-1, 2) for t in pred_tracks]
    tp_t = fp_t = tp_d = fp_d = 0
    n_gt_points = sum(t.shape[0] for t in gt_tracks)
    for g in gt_tracks:
        hit = _hits(g, pred_tracks, cfg.lam)
        tp_t += int(hit.any())
        tp_d += int(hit.any(axis=1).sum())
    for p in pred_tracks:
        hit = _hits(p, gt_tracks, cfg.lam)
        fp_t += int(not hit.any())
        fp_d += int((~hit.any(axis=1)).sum())
    return MetricsReport(CountSet(tp_t, len(gt_tracks) - tp_t, fp_t, "tau"),
                         CountSet(tp_d, n_gt_points - tp_d, fp_d, "d"))


def score(gt: TrackSet, pred: TrackSet, points, cfg: MatchConfig = MatchConfig(),
          pred_points=None) -> MetricsReport:
    """Track- and point-level counts of ``pred`` against ``gt``.

    ``points`` is the PointSet (or (n, 2) array) the gt ids index into;
    ``pred_points`` defaults to the same set.
    """
    def xy_of(p):
        if hasattr(p, "x"):
            return np.column_stack([p.x, p.y])
        return np.asarray(p, dtype=np.float64).reshape(-1, 2)

    gxy = xy_of(points)
    pxy = gxy if pred_points is None else xy_of(pred_points)
    return score_coords(_coords(gt, gxy), _coords(pred, pxy), cfg)


def counts_report(tp, fn_, fp, level="tau"):
    """Report built straight from counts at one level (other level empty)."""
    cs = CountSet(tp, fn_, fp, level)
    empty = CountSet(0, 0, 0, "d" if level == "tau" else "tau")
    return MetricsReport(cs, empty) if level == "tau" else MetricsReport(empty, cs)


# -- runtime benchmark -------------------------------------------------------------

@dataclass
class BenchRow:
    method: str
    n: int
    median_seconds: float | None
    times: list = field(default_factory=list)
    status: str = "ok"


@dataclass
class BenchResult:
    rows: list
    slopes: dict

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["method", "n", "median_seconds", "slope_fit"])
        for r in self.rows:
            w.writerow([r.method, r.n, "" if r.median_seconds is None else f"{r.median_seconds:.6f}", ""])
        for m, s in self.slopes.items():
            w.writerow([m, "", "", "" if s is None else f"{s:.4f}"])
        return buf.getvalue()

    def median(self, method, n):
        for r in self.rows:
            if r.method == method and r.n == n:
                return r.median_seconds
        return None


def loglog_slope(ns, secs):
    pairs = [(n, s) for n, s in zip(ns, secs) if s is not None and s > 0]
    if len(pairs) < 2:
        return None
    x = np.log([p[0] for p in pairs])
    y = np.log([p[1] for p in pairs])
    return float(np.polyfit(x, y, 1)[0])


def scene_for_size(n, template: SceneConfig, seed):
    """Template scene with clutter chosen so the total is close to n points."""
    per_frame = max(0, round((n - template.targets * template.frames) / template.frames))
    cfg = replace(template, clutter_per_frame=int(per_frame), seed=int(seed))
    return generate_scene(cfg)


def bench_scaling(sizes, scene_template: SceneConfig = SceneConfig(), methods=("ts",),
                  repeats=3, seed=0, timeout=300.0, vertical=False, det_cfg=None,
                  warmup=True) -> BenchResult:
    """Median detection time per (method, N) and a log-log slope per method.

    Only the detection call is timed.  A cell whose single run exceeds
    ``timeout`` seconds is recorded as missing and larger sizes of that
    method are skipped; the run itself is not interrupted.
    """
    sizes = [int(s) for s in sizes]
    if sizes != sorted(sizes):
        raise ValueError("sizes must be ascending")
    if repeats < 1:
        raise ValueError("repeats must be positive")
    det_cfg = det_cfg or DetectorConfig()
    run = find_all_tracks_with_vertical if vertical else find_all_tracks
    scenes = {n: scene_for_size(n, scene_template, seed + k) for k, n in enumerate(sizes)}
    rows, slopes = [], {}
    for method in methods:
        cfg = replace(det_cfg, method=method, selection=None)
        if warmup:
            run(scenes[sizes[0]].points, cfg)
        timed_out = False
        for n in sizes:
            ps = scenes[n].points
            if timed_out:
                rows.append(BenchRow(method, n, None, [], "skipped"))
                continue
            if method == "naive" and naive_subset_estimate(ps) > NAIVE_LIMIT:
                rows.append(BenchRow(method, n, None, [], "skipped"))
                continue
            times = []
            for _ in range(repeats):
                t0 = time.perf_counter()
                run(ps, cfg)
                dt = time.perf_counter() - t0
                times.append(dt)
                if dt > timeout:
                    timed_out = True
                    break
            if timed_out:
                rows.append(BenchRow(method, n, None, times, "timeout"))
            else:
                rows.append(BenchRow(method, n, float(np.median(times)), times))
            log.info("bench %s n=%d %s", method, n, rows[-1].median_seconds)
        mine = [r for r in rows if r.method == method]
        slopes[method] = loglog_slope([r.n for r in mine], [r.median_seconds for r in mine])
    return BenchResult(rows, slopes)
