"""Compiled minimax line fitting and track assembly.

The minimax (Chebyshev) line of a point set is the centre line of its
thinnest enclosing strip measured vertically.  The vertical width as a
function of slope is convex and piecewise linear with breakpoints at the
slopes of convex-hull edges, so trying those slopes is exact.
"""

import numpy as np
from numba import njit

from ._sweepcore import _grow_i32, _grow_i64


@njit(cache=True)
def _sorted_by_abscissa(a, o):
    n = a.shape[0]
    idx = np.arange(n)
    if n <= 24:
        for i in range(1, n):
            v = idx[i]
            j = i - 1
            while j >= 0 and (a[idx[j]] > a[v] or (a[idx[j]] == a[v] and o[idx[j]] > o[v])):
                idx[j + 1] = idx[j]
                j -= 1
            idx[j + 1] = v
    else:
        idx = idx[np.argsort(o, kind="mergesort")]
        idx = idx[np.argsort(a[idx], kind="mergesort")]
    return idx


@njit(cache=True)
def _cross(a, o, i, j, k):
    return (a[j] - a[i]) * (o[k] - o[i]) - (o[j] - o[i]) * (a[k] - a[i])


@njit(cache=True)
def cheb_fit(a, o):
    """Minimax line of (a, o).  Returns (m, c, residual, degenerate).

    degenerate is True when every abscissa is equal; the line is then
    horizontal through the mid-range, which is optimal among finite slopes.
    """
    n = a.shape[0]
    lo = np.inf
    hi = -np.inf
    for i in range(n):
        lo = min(lo, o[i])
        hi = max(hi, o[i])
    if n == 0:
        return 0.0, 0.0, 0.0, True
    amin = a.min()
    amax = a.max()
    if amin == amax:
        return 0.0, 0.5 * (lo + hi), 0.5 * (hi - lo), True
    idx = _sorted_by_abscissa(a, o)
    hull = np.empty(2 * n, dtype=np.int64)
    slopes = np.empty(2 * n)
    ns = 0
    # lower hull
    h = 0
    for t in range(n):
        p = idx[t]
        while h >= 2 and _cross(a, o, hull[h - 2], hull[h - 1], p) <= 0.0:
            h -= 1
        hull[h] = p
        h += 1
    for t in range(h - 1):
        u = hull[t]
        v = hull[t + 1]
        if a[v] != a[u]:
            slopes[ns] = (o[v] - o[u]) / (a[v] - a[u])
            ns += 1
    # upper hull
    h = 0
    for t in range(n - 1, -1, -1):
        p = idx[t]
        while h >= 2 and _cross(a, o, hull[h - 2], hull[h - 1], p) <= 0.0:
            h -= 1
        hull[h] = p
        h += 1
    for t in range(h - 1):
        u = hull[t]
        v = hull[t + 1]
        if a[v] != a[u]:
            slopes[ns] = (o[v] - o[u]) / (a[v] - a[u])
            ns += 1
    best_w = np.inf
    best_m = 0.0
    best_c = 0.0
    for k in range(ns):
        s = slopes[k]
        rmin = np.inf
        rmax = -np.inf
        for i in range(n):
            r = o[i] - s * a[i]
            rmin = min(rmin, r)
            rmax = max(rmax, r)
        w = rmax - rmin
        if w < best_w:
            best_w = w
            best_m = s
            best_c = 0.5 * (rmax + rmin)
    return best_m, best_c, 0.5 * best_w, False


@njit(cache=True)
def within(residual, eps, tol):
    return residual <= eps + tol * (1.0 + eps)


@njit(cache=True)
def _fits_ok(sel, k, absc, ordi, tt, ord2, pa, po, pt, p2, eps1, eps2, tol):
    for g in range(k):
        u = sel[g]
        pa[g] = absc[u]
        po[g] = ordi[u]
        pt[g] = tt[u]
        p2[g] = ord2[u]
    r1 = cheb_fit(pa[:k], po[:k])[2]
    if not within(r1, eps1, tol):
        return False
    return within(cheb_fit(pt[:k], p2[:k])[2], eps2, tol)


@njit(cache=True)
def _emit(sel, kk, absc, ordi, tt, ord2, keys, pa, po, pt, p2,
          t_off, t_mem, fits, n_tr, tab_h, tab_v):
    """Store sel[:kk] as a track with both fits unless already stored."""
    srt = np.sort(sel[:kk])
    h = np.uint64(0)
    for q in range(kk):
        h += keys[srt[q]]
    mask = tab_h.shape[0] - 1
    slot = np.int64(h & np.uint64(mask))
    while tab_v[slot] >= 0:
        if tab_h[slot] == h:
            t = tab_v[slot]
            s0 = t_off[t]
            if t_off[t + 1] - s0 == kk:
                same = True
                for q in range(kk):
                    if t_mem[s0 + q] != srt[q]:
                        same = False
                        break
                if same:
                    return t_off, t_mem, fits, n_tr, tab_h, tab_v
        slot = (slot + 1) & mask
    for q in range(kk):
        u = srt[q]
        pa[q] = absc[u]
        po[q] = ordi[u]
        pt[q] = tt[u]
        p2[q] = ord2[u]
    m1, c1, r1, _ = cheb_fit(pa[:kk], po[:kk])
    m2, c2, r2, _ = cheb_fit(pt[:kk], p2[:kk])
    start = t_off[n_tr]
    t_off = _grow_i64(t_off, n_tr + 2)
    t_mem = _grow_i32(t_mem, start + kk)
    if n_tr + 1 > fits.shape[0]:
        nf = np.empty((2 * fits.shape[0], 6))
        nf[: fits.shape[0]] = fits
        fits = nf
    t_mem[start:start + kk] = srt
    t_off[n_tr + 1] = start + kk
    fits[n_tr, 0] = m1
    fits[n_tr, 1] = c1
    fits[n_tr, 2] = r1
    fits[n_tr, 3] = m2
    fits[n_tr, 4] = c2
    fits[n_tr, 5] = r2
    tab_h[slot] = h
    tab_v[slot] = n_tr
    n_tr += 1
    if 2 * n_tr > tab_h.shape[0]:
        cap2 = 2 * tab_h.shape[0]
        nh = np.zeros(cap2, dtype=np.uint64)
        nv = np.full(cap2, -1, dtype=np.int64)
        mask2 = cap2 - 1
        for q in range(tab_h.shape[0]):
            if tab_v[q] >= 0:
                s2 = np.int64(tab_h[q] & np.uint64(mask2))
                while nv[s2] >= 0:
                    s2 = (s2 + 1) & mask2
                nh[s2] = tab_h[q]
                nv[s2] = tab_v[q]
        tab_h = nh
        tab_v = nv
    return t_off, t_mem, fits, n_tr, tab_h, tab_v


@njit(cache=True, nogil=True)
def collect_tracks(off, mem, absc, ordi, tt, ord2, frames, eps1, eps2, tol, keys,
                   min_len, node_cap):
    """Split structures into maximal one-point-per-frame feasible subsets.

    When a whole structure fits within tolerance in both axis pairs (always
    the case for sweep reports, which are stabbed by one line in each),
    every subset is feasible and the maximal ones are exactly the choices
    of one point from every frame.  Otherwise a depth-first search runs
    over the frames, each frame contributing one point or being skipped;
    feasibility is hereditary, so a failing partial selection is cut, and
    a leaf is kept when no skipped frame can extend it.  Identical tracks
    are emitted once.

    Returns (t_off, t_mem, fits, n_truncated); fits rows hold
    (m1, c1, r1, m2, c2, r2).  A structure needing more than node_cap
    choices or search nodes is cut short and counted in n_truncated.
    """
    t_off = np.zeros(64, dtype=np.int64)
    t_mem = np.empty(256, dtype=np.int32)
    fits = np.empty((64, 6))
    n_tr = 0
    n_truncated = 0
    tab_h = np.zeros(256, dtype=np.uint64)
    tab_v = np.full(256, -1, dtype=np.int64)
    for j in range(off.shape[0] - 1):
        ids = mem[off[j]:off[j + 1]].copy()
        n = ids.shape[0]
        if n < min_len:
            continue
        fr = frames[ids]
        order = np.argsort(fr * (2 * np.int64(ids.max()) + 2) + ids)
        ids = ids[order]
        fr = fr[order]
        g_start = np.empty(n + 1, dtype=np.int64)
        ng = 0
        for i in range(n):
            if i == 0 or fr[i] != fr[i - 1]:
                g_start[ng] = i
                ng += 1
        g_start[ng] = n
        if ng < min_len:
            continue
        sel = np.empty(max(n, ng + 1), dtype=np.int32)
        pa = np.empty(max(n, ng + 1))
        po = np.empty(max(n, ng + 1))
        pt = np.empty(max(n, ng + 1))
        p2 = np.empty(max(n, ng + 1))
        for i in range(n):
            sel[i] = ids[i]
        whole = _fits_ok(sel, n, absc, ordi, tt, ord2, pa, po, pt, p2, eps1, eps2, tol)
        choice = np.zeros(ng, dtype=np.int64)
        if whole:
            # every full choice is feasible; enumerate them like an odometer
            done = 0
            while True:
                for g in range(ng):
                    sel[g] = ids[g_start[g] + choice[g]]
                t_off, t_mem, fits, n_tr, tab_h, tab_v = _emit(
                    sel, ng, absc, ordi, tt, ord2, keys, pa, po, pt, p2,
                    t_off, t_mem, fits, n_tr, tab_h, tab_v)
                done += 1
                g = ng - 1
                while g >= 0:
                    choice[g] += 1
                    if choice[g] < g_start[g + 1] - g_start[g]:
                        break
                    choice[g] = 0
                    g -= 1
                if g < 0:
                    break
                if done >= node_cap:
                    n_truncated += 1
                    break
            continue
        cnt = np.zeros(ng + 1, dtype=np.int64)
        nodes = 0
        g = 0
        choice[0] = -1
        while g >= 0:
            size = g_start[g + 1] - g_start[g]
            choice[g] += 1
            if choice[g] > size:
                g -= 1
                continue
            k = cnt[g]
            if choice[g] < size:
                sel[k] = ids[g_start[g] + choice[g]]
                if k >= 1 and not _fits_ok(sel, k + 1, absc, ordi, tt, ord2,
                                           pa, po, pt, p2, eps1, eps2, tol):
                    continue
                cnt[g + 1] = k + 1
            else:
                if k + (ng - g - 1) < min_len:
                    continue
                cnt[g + 1] = k
            nodes += 1
            if nodes > node_cap:
                n_truncated += 1
                break
            if g < ng - 1:
                g += 1
                choice[g] = -1
                continue
            kk = cnt[ng]
            if kk < min_len:
                continue
            maximal = True
            for h in range(ng):
                if choice[h] < g_start[h + 1] - g_start[h]:
                    continue
                for i in range(g_start[h], g_start[h + 1]):
                    sel[kk] = ids[i]
                    if _fits_ok(sel, kk + 1, absc, ordi, tt, ord2,
                                pa, po, pt, p2, eps1, eps2, tol):
                        maximal = False
                        break
                if not maximal:
                    break
            if maximal:
                t_off, t_mem, fits, n_tr, tab_h, tab_v = _emit(
                    sel, kk, absc, ordi, tt, ord2, keys, pa, po, pt, p2,
                    t_off, t_mem, fits, n_tr, tab_h, tab_v)
    return t_off[: n_tr + 1].copy(), t_mem[: t_off[n_tr]].copy(), fits[:n_tr].copy(), n_truncated


@njit(cache=True, nogil=True)
def maximal_mask(t_off, t_mem, n_points):
    """keep[k] is False when track k is a strict subset of another track."""
    n_tr = t_off.shape[0] - 1
    # tracks through each point, as a CSR list
    cnt = np.zeros(n_points + 1, dtype=np.int64)
    for q in range(t_mem.shape[0]):
        cnt[t_mem[q] + 1] += 1
    for i in range(n_points):
        cnt[i + 1] += cnt[i]
    fill = cnt[:-1].copy()
    by_pt = np.empty(t_mem.shape[0], dtype=np.int64)
    for k in range(n_tr):
        for q in range(t_off[k], t_off[k + 1]):
            u = t_mem[q]
            by_pt[fill[u]] = k
            fill[u] += 1
    keep = np.ones(n_tr, dtype=np.bool_)
    mark = np.full(n_points, -1, dtype=np.int64)
    for k in range(n_tr):
        s0 = t_off[k]
        size = t_off[k + 1] - s0
        for q in range(s0, t_off[k + 1]):
            mark[t_mem[q]] = k
        # any superset must pass through the track's first point
        u = t_mem[s0]
        for w in range(cnt[u], cnt[u + 1]):
            o = by_pt[w]
            if t_off[o + 1] - t_off[o] <= size:
                continue
            hit = 0
            for q in range(t_off[o], t_off[o + 1]):
                if mark[t_mem[q]] == k:
                    hit += 1
            if hit == size:
                keep[k] = False
                break
    return keep
