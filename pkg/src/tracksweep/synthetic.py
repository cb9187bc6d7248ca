"""Synthetic scenes: constant-velocity targets plus clutter, and their file formats.

Points are stored as CSV with header ``frame,x,y``; the row order defines
point ids.  Ground truth and detection results are JSON documents of the
form ``{"tracks": [...], "params": {...}}``.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _fitcore
from .detection import Track, TrackSet
from .errors import InfeasibleConfig, ParseError, SchemaError
from .geometry import Line2, PointSet, is_feasible

MAX_ATTEMPTS = 100
POINT_COLUMNS = ("frame", "x", "y")
TRACK_FIELDS = ("point_ids", "line_xy", "line_tx", "residual_xy", "residual_tx")


@dataclass(frozen=True)
class SceneConfig:
    frames: int = 5
    width: float = 2048.0
    height: float = 2048.0
    targets: int = 4
    clutter_per_frame: int = 100
    jitter_sigma: float = 0.5
    speed_range: tuple = (5.0, 30.0)
    dropout_prob: float = 0.0
    seed: int = 0
    clutter_mode: str = "uniform"

    def __post_init__(self):
        object.__setattr__(self, "speed_range", tuple(float(v) for v in self.speed_range))
        if self.frames < 1:
            raise ValueError("frames must be at least 1")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("width and height must be positive")
        if self.targets < 0 or self.clutter_per_frame < 0:
            raise ValueError("targets and clutter_per_frame must be non-negative")
        if self.jitter_sigma < 0:
            raise ValueError("jitter_sigma must be non-negative")
        lo, hi = self.speed_range
        if not (0 <= lo <= hi):
            raise ValueError("speed_range must satisfy 0 <= min <= max")
        if not (0 <= self.dropout_prob < 1):
            raise ValueError("dropout_prob must lie in [0, 1)")
        if self.clutter_mode not in ("uniform", "streak"):
            raise ValueError("clutter_mode must be 'uniform' or 'streak'")

    @property
    def gt_eps(self):
        """Tolerance every ground-truth track is guaranteed to meet."""
        return 3.0 * self.jitter_sigma + 1e-6

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["speed_range"] = list(self.speed_range)
        return d

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in dataclasses.fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})


@dataclass
class GeneratedScene:
    points: PointSet
    gt: TrackSet
    config: SceneConfig | None = None
    extra: dict = field(default_factory=dict)


def _fit_track(ps, ids, swapped):
    idx = np.asarray(ids)
    a, o = (ps.y, ps.x) if swapped else (ps.x, ps.y)
    t = ps.t.astype(np.float64)
    m1, c1, r1, _ = _fitcore.cheb_fit(np.ascontiguousarray(a[idx]), np.ascontiguousarray(o[idx]))
    m2, c2, r2, _ = _fitcore.cheb_fit(np.ascontiguousarray(t[idx]), np.ascontiguousarray(a[idx]))
    return Track(tuple(int(i) for i in ids), Line2(m1, c1), Line2(m2, c2), float(r1), float(r2), swapped)


def _draw_target(cfg: SceneConfig, rng):
    """One target's surviving (frame, x, y) rows, or None if it must be redrawn."""
    frames = np.arange(1, cfg.frames + 1)
    speed = rng.uniform(*cfg.speed_range)
    ang = rng.uniform(0.0, 2.0 * math.pi)
    v = speed * np.array([math.cos(ang), math.sin(ang)])
    # pick a start so the whole path stays inside the image
    span = v * (cfg.frames - 1)
    lo = np.maximum(0.0, -span)
    hi = np.minimum([cfg.width, cfg.height], np.array([cfg.width, cfg.height]) - span)
    if np.any(hi <= lo):
        return None
    p0 = rng.uniform(lo, hi)
    pos = p0[None, :] + (frames - 1)[:, None] * v[None, :]
    pos = pos + rng.normal(0.0, cfg.jitter_sigma, size=pos.shape) if cfg.jitter_sigma > 0 else pos
    keep = rng.random(cfg.frames) >= cfg.dropout_prob
    if keep.sum() < 3:
        return None
    if np.any(pos < 0) or np.any(pos[:, 0] > cfg.width) or np.any(pos[:, 1] > cfg.height):
        return None
    return frames[keep], pos[keep, 0], pos[keep, 1]


def _clutter(cfg: SceneConfig, rng):
    n = cfg.clutter_per_frame
    rows = []
    for f in range(1, cfg.frames + 1):
        if cfg.clutter_mode == "uniform":
            xy = rng.uniform([0.0, 0.0], [cfg.width, cfg.height], size=(n, 2))
        else:
            # short streaks mimicking imperfectly removed stars
            n_streaks = max(1, n // 5)
            centres = rng.uniform([0.0, 0.0], [cfg.width, cfg.height], size=(n_streaks, 2))
            ang = rng.uniform(0.0, math.pi, n_streaks)
            which = rng.integers(0, n_streaks, n)
            s = rng.uniform(-10.0, 10.0, n)
            xy = centres[which] + s[:, None] * np.column_stack([np.cos(ang[which]), np.sin(ang[which])])
            xy = np.clip(xy + rng.normal(0.0, 0.5, size=xy.shape), 0.0, [cfg.width, cfg.height])
        rows.append((np.full(n, f), xy[:, 0], xy[:, 1]))
    return rows


def generate_scene(cfg: SceneConfig) -> GeneratedScene:
    """Deterministic scene for ``cfg.seed``.

    Each target is redrawn until its surviving points number at least three
    and fit within ``cfg.gt_eps`` in both (x, y) and (t, x), in plain or
    swapped axes; after MAX_ATTEMPTS failures InfeasibleConfig is raised.
    """
    if cfg.targets and cfg.frames < 3:
        raise InfeasibleConfig("targets need at least three frames")
    rng = np.random.default_rng(cfg.seed)
    eps = cfg.gt_eps
    targets = []
    for k in range(cfg.targets):
        for _ in range(MAX_ATTEMPTS):
            drawn = _draw_target(cfg, rng)
            if drawn is None:
                continue
            f, x, y = drawn
            probe = PointSet(x, y, f, dedupe=False)
            pts = probe.points
            if is_feasible(pts, eps, eps):
                targets.append((drawn, False))
                break
            if is_feasible(pts, eps, eps, swap_axes=True):
                targets.append((drawn, True))
                break
        else:
            raise InfeasibleConfig(f"target {k} failed {MAX_ATTEMPTS} regeneration attempts")
    chunks = [(f, x, y, np.full(f.size, k)) for k, ((f, x, y), _) in enumerate(targets)]
    chunks += [(f, x, y, np.full(f.size, -1)) for f, x, y in _clutter(cfg, rng)]
    if chunks:
        f = np.concatenate([c[0] for c in chunks]).astype(np.int64)
        x = np.concatenate([c[1] for c in chunks]).astype(np.float64)
        y = np.concatenate([c[2] for c in chunks]).astype(np.float64)
        owner = np.concatenate([c[3] for c in chunks]).astype(np.int64)
    else:
        f = np.empty(0, dtype=np.int64)
        x = y = np.empty(0)
        owner = np.empty(0, dtype=np.int64)
    # ids are ordered by frame; inside a frame the order is random
    perm = np.lexsort((rng.permutation(f.size), f))
    f, x, y, owner = f[perm], x[perm], y[perm], owner[perm]
    ps = PointSet(x, y, f, dedupe=False)
    tracks = []
    for k, (_, swapped) in enumerate(targets):
        ids = np.flatnonzero(owner == k)
        tracks.append(_fit_track(ps, ids, swapped))
    gt = TrackSet(tracks, {"scene": cfg.to_dict(), "gt_eps": eps})
    return GeneratedScene(ps, gt, cfg)


# -- files ------------------------------------------------------------------

def write_points(ps: PointSet, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(POINT_COLUMNS)
        for f, x, y in zip(ps.t, ps.x, ps.y):
            w.writerow((int(f), repr(float(x)), repr(float(y))))


def read_points(path, dedupe=True) -> PointSet:
    """Parse a points CSV.  Errors carry the 1-based file line and column."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty points file", line=1) from None
        header = [h.strip().lower() for h in header]
        for col in POINT_COLUMNS:
            if col not in header:
                raise ParseError(f"missing column {col!r}", line=1, column=col)
        pos = {c: header.index(c) for c in POINT_COLUMNS}
        frames, xs, ys = [], [], []
        for row in reader:
            line = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", line=line)
            vals = {}
            for col in POINT_COLUMNS:
                cell = row[pos[col]].strip()
                try:
                    v = float(cell)
                except ValueError:
                    raise ParseError(f"not a number: {cell!r}", line=line, column=col) from None
                if not math.isfinite(v):
                    raise ParseError(f"non-finite value {cell!r}", line=line, column=col)
                vals[col] = v
            if vals["frame"] != int(vals["frame"]) or vals["frame"] < 1:
                raise ParseError("frame must be a positive integer", line=line, column="frame")
            frames.append(int(vals["frame"]))
            xs.append(vals["x"])
            ys.append(vals["y"])
    return PointSet(np.array(xs), np.array(ys), np.array(frames, dtype=np.int64), dedupe=dedupe)


def tracks_to_json(ts: TrackSet):
    return json.dumps(ts.to_dict(), indent=2, sort_keys=True) + "\n"


def write_tracks(ts: TrackSet, path):
    Path(path).write_text(tracks_to_json(ts))


def parse_tracks(doc, n_points=None) -> TrackSet:
    """Validate a tracks document (already decoded JSON)."""
    if not isinstance(doc, dict) or "tracks" not in doc:
        raise SchemaError("document must be an object with a 'tracks' array")
    if not isinstance(doc["tracks"], list):
        raise SchemaError("'tracks' must be an array")
    tracks = []
    for k, d in enumerate(doc["tracks"]):
        if not isinstance(d, dict):
            raise SchemaError(f"track {k} is not an object")
        missing = [f for f in TRACK_FIELDS if f not in d]
        if missing:
            raise SchemaError(f"track {k} lacks field(s) {', '.join(missing)}")
        ids = d["point_ids"]
        if not isinstance(ids, list) or not all(isinstance(i, int) and not isinstance(i, bool) for i in ids):
            raise SchemaError(f"track {k}: point_ids must be a list of integers")
        if n_points is not None and any(i < 0 or i >= n_points for i in ids):
            raise SchemaError(f"track {k} references a point id outside 0..{n_points - 1}")
        for name in ("line_xy", "line_tx"):
            ln = d[name]
            if not isinstance(ln, dict) or "m" not in ln or "c" not in ln:
                raise SchemaError(f"track {k}: {name} needs 'm' and 'c'")
        try:
            tracks.append(Track.from_dict(d))
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"track {k}: {exc}") from None
    params = doc.get("params", {})
    if not isinstance(params, dict):
        raise SchemaError("'params' must be an object")
    return TrackSet(tracks, params)


def read_tracks(path, n_points=None) -> TrackSet:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    return parse_tracks(doc, n_points)


def write_scene(scene: GeneratedScene, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_points(scene.points, out / "points.csv")
    write_tracks(scene.gt, out / "gt.json")
    return out / "points.csv", out / "gt.json"


def read_scene(in_dir) -> GeneratedScene:
    """Load points.csv and gt.json; gt ids must index existing points."""
    d = Path(in_dir)
    ps = read_points(d / "points.csv", dedupe=False)
    gt = read_tracks(d / "gt.json", n_points=len(ps))
    cfg = None
    scene_cfg = gt.params.get("scene")
    if isinstance(scene_cfg, dict):
        try:
            cfg = SceneConfig.from_dict(scene_cfg)
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"bad scene parameters: {exc}") from None
    return GeneratedScene(ps, gt, cfg)
