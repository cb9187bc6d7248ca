"""Classic line finders used as structure extractors: sequential RANSAC and Hough.

Both return point-id sets only; turning them into tracks is done by the
detection module, which runs the same (t, x) stage as the sweep pipeline.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import maximum_filter


def _as_xy(pts):
    arr = np.asarray(pts, dtype=np.float64)
    if arr.size == 0:
        return np.empty((0, 2))
    return arr.reshape(-1, 2)


def ransac_lines(pts, inlier_eps, iterations=1000, min_inliers=3, seed=0):
    """Sequential two-point RANSAC with perpendicular inlier distance.

    After each accepted model its inliers are removed and the search repeats
    until no sampled line gathers ``min_inliers`` points.  Among equally good
    samples the earliest drawn wins, so a point on two lines goes to the line
    accepted first.  Returns sorted id tuples in acceptance order.
    """
    if iterations < 1:
        raise ValueError("iterations must be at least 1")
    if inlier_eps <= 0:
        raise ValueError("inlier_eps must be positive")
    xy = _as_xy(pts)
    rng = np.random.default_rng(seed)
    alive = np.arange(xy.shape[0])
    found = []
    while alive.size >= max(2, min_inliers):
        sub = xy[alive]
        n = sub.shape[0]
        i = rng.integers(0, n, size=iterations)
        j = rng.integers(0, n - 1, size=iterations)
        j = j + (j >= i)
        d = sub[j] - sub[i]
        norm = np.hypot(d[:, 0], d[:, 1])
        ok = norm > 0
        # distance of every point to every sampled line, one row per sample
        rel_x = sub[None, :, 0] - sub[i, 0][:, None]
        rel_y = sub[None, :, 1] - sub[i, 1][:, None]
        with np.errstate(invalid="ignore", divide="ignore"):
            dist = np.abs(d[:, 0:1] * rel_y - d[:, 1:2] * rel_x) / norm[:, None]
        counts = np.where(ok, (dist <= inlier_eps).sum(axis=1), -1)
        best = int(np.argmax(counts))
        if counts[best] < min_inliers:
            break
        mask = dist[best] <= inlier_eps
        found.append(tuple(int(v) for v in np.sort(alive[mask])))
        alive = alive[~mask]
    return found


def hough_lines(pts, rho_bins=512, theta_bins=180, peak_count=10, inlier_eps=2.0):
    """Standard (rho, theta) accumulator; inlier sets of the strongest peaks.

    Peaks are local maxima of the accumulator over a 3x3 neighbourhood,
    taken in decreasing vote order (ties by bin index).  Each peak's inlier
    set holds the points within ``inlier_eps`` of the bin-centre line.
    Identical sets are reported once.
    """
    if rho_bins < 2 or theta_bins < 2:
        raise ValueError("need at least two bins per axis")
    xy = _as_xy(pts)
    if xy.shape[0] == 0:
        return []
    centre = 0.5 * (xy.min(axis=0) + xy.max(axis=0))
    rel = xy - centre
    radius = float(np.hypot(rel[:, 0], rel[:, 1]).max()) + 1.0
    theta = np.arange(theta_bins) * (np.pi / theta_bins)
    cos, sin = np.cos(theta), np.sin(theta)
    rho = rel[:, 0:1] * cos + rel[:, 1:2] * sin
    width = 2.0 * radius / rho_bins
    rbin = np.clip(((rho + radius) / width).astype(np.int64), 0, rho_bins - 1)
    flat = rbin * theta_bins + np.arange(theta_bins)
    acc = np.bincount(flat.ravel(), minlength=rho_bins * theta_bins).reshape(rho_bins, theta_bins)
    peaks = (acc == maximum_filter(acc, size=3, mode="constant")) & (acc >= 2)
    cand = np.flatnonzero(peaks.ravel())
    cand = cand[np.lexsort((cand, -acc.ravel()[cand]))][:peak_count]
    out, seen = [], set()
    for f in cand:
        rb, tb = divmod(int(f), theta_bins)
        r0 = -radius + (rb + 0.5) * width
        dist = np.abs(rel[:, 0] * cos[tb] + rel[:, 1] * sin[tb] - r0)
        ids = tuple(int(v) for v in np.flatnonzero(dist <= inlier_eps))
        if ids and ids not in seen:
            seen.add(ids)
            out.append(ids)
    return out
