"""Compiled kernels for sweeping arrangements of offset dual lines.

Lines are addressed by their position in the initial slope order (ascending
slope, then descending intercept, then ascending original id).  That position
doubles as the symbolic-perturbation priority: Upper line ``i`` has its
intercept raised and Lower line ``i`` lowered by an infinitesimal ``eta_i``
with ``eta_0 >> eta_1 >> ...`` (identical Lower lines get their priorities
reversed).  This makes every predicate below decisive and mutually
consistent, and widens each band so that closed-band membership survives.

Rows of the consensus arrays are bound to cut positions: row ``r`` is the
region between ``order[r - 1]`` and ``order[r]`` (row 0 above everything,
row ``2N`` below everything).
"""

import numpy as np
from numba import njit

LOWER = 0
UPPER = 1

_FILTER = 1e-15
_SPLITTER = 134217729.0  # 2**27 + 1

# Hot helpers that never allocate are compiled with _nrt=False: otherwise
# every call increfs/decrefs each array argument atomically, which costs
# more than the helpers' actual work.


# --------------------------------------------------------------------------
# exact predicates
# --------------------------------------------------------------------------

@njit(cache=True, _nrt=False)
def _two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


@njit(cache=True, _nrt=False)
def _split(a):
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


@njit(cache=True, _nrt=False)
def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    err = al * bl - (((p - ah * bh) - al * bh) - ah * bl)
    return p, err


# The packed line array L carries SCRATCH_ROWS trailing rows of workspace
# for the exact fallback (16 product terms + a 17-component expansion), so
# the predicates never allocate.
SCRATCH_ROWS = 9


@njit(cache=True, _nrt=False, inline="always")
def _wget(L, base, k):
    return L[base + k // 4, k % 4]


@njit(cache=True, _nrt=False, inline="always")
def _wset(L, base, k, v):
    L[base + k // 4, k % 4] = v


@njit(cache=True, _nrt=False)
def _expansion_sign(L, base, n_terms):
    # Shewchuk grow-expansion over workspace slots [0, n_terms); the
    # expansion lives in slots n_terms.. with the largest component last.
    n = 0
    for i in range(n_terms):
        q = _wget(L, base, i)
        if q != 0.0:
            for j in range(n):
                q, h = _two_sum(q, _wget(L, base, n_terms + j))
                _wset(L, base, n_terms + j, h)
            _wset(L, base, n_terms + n, q)
            n += 1
    s = 0
    for j in range(n - 1, -1, -1):
        e = _wget(L, base, n_terms + j)
        if e != 0.0:
            s = 1 if e > 0.0 else -1
            break
    return s


@njit(cache=True, _nrt=False)
def _exact_cross_sign(na_a, na_b, dc_a, dc_b, nc_a, nc_b, da_a, da_b, L):
    """sign((na_a - na_b) * (dc_a - dc_b) - (nc_a - nc_b) * (da_a - da_b)), exactly."""
    base = L.shape[0] - SCRATCH_ROWS
    na_h, na_l = _two_sum(na_a, -na_b)
    dc_h, dc_l = _two_sum(dc_a, -dc_b)
    nc_h, nc_l = _two_sum(nc_a, -nc_b)
    da_h, da_l = _two_sum(da_a, -da_b)
    k = 0
    for u in (na_h, na_l):
        for v in (dc_h, dc_l):
            p, e = _two_prod(u, v)
            _wset(L, base, k, p)
            _wset(L, base, k + 1, e)
            k += 2
    for u in (nc_h, nc_l):
        for v in (da_h, da_l):
            p, e = _two_prod(u, v)
            _wset(L, base, k, -p)
            _wset(L, base, k + 1, -e)
            k += 2
    return _expansion_sign(L, base, 16)


@njit(cache=True, _nrt=False)
def _sgn(v):
    if v > 0.0:
        return 1
    if v < 0.0:
        return -1
    return 0


@njit(cache=True, _nrt=False)
def _perturbed_sign(a, b, c, d, L):
    # x(a,b) - x(c,d) = sum_l coef_l * eta_l; the line with the highest
    # priority (smallest prio) and a nonzero coefficient decides.  Lower
    # lines move down and Upper lines up, so every band widens and points
    # lying exactly on a band edge stay inside it.  coef of l in x(l, o)
    # is sigma_l / (m_o - m_l).
    # visit the distinct lines among a, b, c, d by ascending priority
    s = 0
    last = -1.0
    quad = (np.int64(a), np.int64(b), np.int64(c), np.int64(d))
    for _ in range(4):
        l = -1
        best = 0.0
        for u in quad:
            pu = L[u, 3]
            if pu > last and (l < 0 or pu < best):
                l = u
                best = pu
        if l < 0:
            break
        last = best
        in1 = l == a or l == b
        in2 = l == c or l == d
        o1 = b if l == a else a
        o2 = d if l == c else c
        if in1 and in2:
            if o1 == o2:
                continue
            s = _sgn(L[o2, 0] - L[o1, 0]) * _sgn(L[o1, 0] - L[l, 0]) * _sgn(L[o2, 0] - L[l, 0])
        elif in1:
            s = _sgn(L[o1, 0] - L[l, 0])
        else:
            s = -_sgn(L[o2, 0] - L[l, 0])
        if s != 0:
            if L[l, 2] != 1.0:
                s = -s
            break
    return s


@njit(cache=True, _nrt=False)
def _cmp_slow(a, b, c, d, L):
    s = _exact_cross_sign(L[b, 1], L[a, 1], L[c, 0], L[d, 0], L[d, 1], L[c, 1], L[a, 0], L[b, 0], L)
    if s != 0:
        return s * _sgn(L[a, 0] - L[b, 0]) * _sgn(L[c, 0] - L[d, 0])
    return _perturbed_sign(a, b, c, d, L)


@njit(cache=True, _nrt=False)
def cmp_x(a, b, c, d, L):
    """Sign of abscissa(a∩b) - abscissa(c∩d) in the perturbed arrangement.

    Both pairs must be non-parallel.  Returns 0 only for the same vertex.
    """
    if (a == c and b == d) or (a == d and b == c):
        return 0
    da = L[a, 0] - L[b, 0]
    dc = L[c, 0] - L[d, 0]
    p1 = (L[b, 1] - L[a, 1]) * dc
    p2 = (L[d, 1] - L[c, 1]) * da
    det = p1 - p2
    bound = _FILTER * (abs(p1) + abs(p2))
    if det > bound:
        return 1 if (da > 0.0) == (dc > 0.0) else -1
    if det < -bound:
        return -1 if (da > 0.0) == (dc > 0.0) else 1
    return _cmp_slow(a, b, c, d, L)


# --------------------------------------------------------------------------
# horizon trees
# --------------------------------------------------------------------------

@njit(cache=True, _nrt=False)
def _upper_end(line, k, L, ur):
    # walk the upper-horizon chain starting at k; first steeper piece hit
    while k >= 0:
        if L[k, 0] > L[line, 0]:
            r = ur[k]
            if r < 0 or cmp_x(line, k, k, r, L) < 0:
                return k
            k = r
        else:
            k = ur[k]
    return -1


@njit(cache=True, _nrt=False)
def _lower_end(line, k, L, lr):
    while k >= 0:
        if L[k, 0] < L[line, 0]:
            r = lr[k]
            if r < 0 or cmp_x(line, k, k, r, L) < 0:
                return k
            k = r
        else:
            k = lr[k]
    return -1


@njit(cache=True, _nrt=False)
def _ready(j, order, ur, lr):
    a = order[j]
    b = order[j + 1]
    return ur[a] == b and lr[b] == a


@njit(cache=True, _nrt=False)
def init_horizon(L, order, ur, lr, ul, ll, stack, meta):
    n = order.shape[0]
    for j in range(n - 1, -1, -1):
        below = order[j + 1] if j + 1 < n else -1
        ur[order[j]] = _upper_end(order[j], below, L, ur)
    for j in range(n):
        above = order[j - 1] if j > 0 else -1
        lr[order[j]] = _lower_end(order[j], above, L, lr)
    ul[:] = -1
    ll[:] = -1
    sp = 0
    for j in range(n - 2, -1, -1):
        if _ready(j, order, ur, lr):
            stack[sp] = j
            sp += 1
    meta[0] = sp
    meta[1] = 0


@njit(cache=True, _nrt=False)
def ts_step(L, order, ur, lr, ul, ll, stack, meta):
    """One elementary step.  Returns the cut position, -1 when done, -2 on corruption."""
    sp = meta[0]
    if sp == 0:
        return -1
    sp -= 1
    j = stack[sp]
    n = order.shape[0]
    a = order[j]
    b = order[j + 1]
    if ur[a] != b or lr[b] != a:
        meta[0] = sp
        return -2
    order[j] = b
    order[j + 1] = a
    ul[b] = a
    ll[b] = -1
    ll[a] = b
    ul[a] = -1
    below = order[j + 2] if j + 2 < n else -1
    ur[a] = _upper_end(a, below, L, ur)
    above = order[j - 1] if j >= 1 else -1
    lr[b] = _lower_end(b, above, L, lr)
    if j + 2 < n and _ready(j + 1, order, ur, lr):
        stack[sp] = j + 1
        sp += 1
    if j >= 1 and _ready(j - 1, order, ur, lr):
        stack[sp] = j - 1
        sp += 1
    meta[0] = sp
    meta[1] += 1
    return j


# --------------------------------------------------------------------------
# consensus rows
# --------------------------------------------------------------------------
# Stab sets of single cells are small, so each row keeps an unordered member
# list instead of a dense point/frame matrix.  Frame counts are recovered by
# scanning the row; Z is kept up to date incrementally.

@njit(cache=True)
def _grow_rows(members, need):
    if need <= members.shape[1]:
        return members
    out = np.empty((members.shape[0], max(need, 2 * members.shape[1])), dtype=np.int32)
    out[:, : members.shape[1]] = members
    return out


@njit(cache=True, _nrt=False)
def _add(r, i, members, msize, Z, rowhash, pfrm, keys):
    s = msize[r]
    f = pfrm[i]
    fresh = True
    present = False
    # no early return inside the loop: numba compiles that pattern poorly
    for k in range(s):
        u = members[r, k]
        if u == i:
            present = True
            break
        if pfrm[u] == f:
            fresh = False
    if present:
        return
    members[r, s] = i
    msize[r] = s + 1
    rowhash[r] += keys[i]
    if fresh:
        Z[r] += 1


@njit(cache=True, _nrt=False)
def _remove(r, i, members, msize, Z, rowhash, pfrm, keys):
    s = msize[r]
    f = pfrm[i]
    at = -1
    fresh = True
    for k in range(s):
        u = members[r, k]
        if u == i:
            at = k
        elif pfrm[u] == f:
            fresh = False
    if at < 0:
        return
    members[r, at] = members[r, s - 1]
    msize[r] = s - 1
    rowhash[r] -= keys[i]
    if fresh:
        Z[r] -= 1


@njit(cache=True)
def init_consensus(kind, src, members, msize, Z, rowhash, pfrm, keys):
    """Fill rows 0..2N walking down the initial cut (lines in sorted order)."""
    n = kind.shape[0]
    msize[0] = 0
    Z[0] = 0
    rowhash[0] = 0
    for k in range(n):
        r = k + 1
        s = msize[k]
        members[r, :s] = members[k, :s]
        msize[r] = s
        Z[r] = Z[k]
        rowhash[r] = rowhash[k]
        if kind[k] == UPPER:
            members = _grow_rows(members, s + 1)
            _add(r, src[k], members, msize, Z, rowhash, pfrm, keys)
        else:
            _remove(r, src[k], members, msize, Z, rowhash, pfrm, keys)
    return members


@njit(cache=True, _nrt=False)
def apply_crossing(r, p, q, kind, src, members, msize, Z, rowhash, pfrm, keys):
    """Update row r after line p (previously above) and q swap.

    Crossing p from below to above it enters p's strip iff p is a Lower line;
    crossing q from above to below it enters q's strip iff q is an Upper line.
    The caller guarantees room for two more members in the row.
    """
    if kind[p] == UPPER:
        _remove(r, src[p], members, msize, Z, rowhash, pfrm, keys)
    if kind[q] == LOWER:
        _remove(r, src[q], members, msize, Z, rowhash, pfrm, keys)
    if kind[p] == LOWER:
        _add(r, src[p], members, msize, Z, rowhash, pfrm, keys)
    if kind[q] == UPPER:
        _add(r, src[q], members, msize, Z, rowhash, pfrm, keys)


# --------------------------------------------------------------------------
# report collection
# --------------------------------------------------------------------------

@njit(cache=True)
def _grow_i32(a, need):
    if need <= a.shape[0]:
        return a
    b = np.empty(max(need, 2 * a.shape[0]), dtype=a.dtype)
    b[: a.shape[0]] = a
    return b


@njit(cache=True)
def _grow_i64(a, need):
    if need <= a.shape[0]:
        return a
    b = np.empty(max(need, 2 * a.shape[0]), dtype=a.dtype)
    b[: a.shape[0]] = a
    return b


@njit(cache=True, _nrt=False)
def _same_set(buf, k, start, stop, rep_mem, mark, stamp):
    if stop - start != k:
        return False
    stamp[0] += 1
    t = stamp[0]
    for q in range(k):
        mark[buf[q]] = t
    for q in range(start, stop):
        if mark[rep_mem[q]] != t:
            return False
    return True


@njit(cache=True, _nrt=False)
def _probe(tab_h, tab_v, h, buf, k, rep_off, rep_mem, mark, stamp):
    """Slot holding a report equal to buf[:k], or the empty slot to insert it at.

    Returns (slot, found).  Linear probing; tab_v < 0 marks an empty slot.
    """
    mask = tab_h.shape[0] - 1
    slot = np.int64(h & np.uint64(mask))
    found = False
    while tab_v[slot] >= 0:
        if tab_h[slot] == h:
            idx = tab_v[slot]
            if _same_set(buf, k, rep_off[idx], rep_off[idx + 1], rep_mem, mark, stamp):
                found = True
                break
        slot = (slot + 1) & mask
    return slot, found


@njit(cache=True, _nrt=False)
def _gate_row(r, members, msize, pfrm, keys, gate, gt, gx, geps, min_frames, buf,
              keep, w_t, w_x, w_f, w_i, rowhash):
    """Copy row r into buf, reduced when gating.  Returns (k, hash); k = 0 skips.

    Gating drops points that lie in no geps-feasible (gt, gx) triple of
    distinct frames, then requires min_frames distinct frames among the
    rest.  Rows longer than TRIPLE_MAX pass through unreduced.
    """
    s = msize[r]
    for q in range(s):
        buf[q] = members[r, q]
    if not gate or s > TRIPLE_MAX:
        return s, rowhash[r]
    cnt = _triple_mark(buf[:s], gt, gx, pfrm, geps, keep, w_t, w_x, w_f, w_i)
    if cnt < 3 or cnt < min_frames:
        return 0, np.uint64(0)
    if cnt == s and min_frames <= 3:
        return s, rowhash[r]
    k = 0
    h = np.uint64(0)
    for q in range(s):
        if keep[q]:
            buf[k] = buf[q]
            h += keys[buf[q]]
            k += 1
    if min_frames > 3:
        z = 0
        for q in range(k):
            fresh = True
            for u in range(q):
                if pfrm[buf[u]] == pfrm[buf[q]]:
                    fresh = False
                    break
            if fresh:
                z += 1
        if z < min_frames:
            return 0, np.uint64(0)
    return k, h


@njit(cache=True)
def _report(buf, k, h, p, q, z, rep_off, rep_mem, rep_p, rep_q, rep_z, n_rep,
            tab_h, tab_v, mark, stamp):
    """Append buf[:k] unless already reported.  Returns the updated arrays."""
    slot, dup = _probe(tab_h, tab_v, h, buf, k, rep_off, rep_mem, mark, stamp)
    if dup:
        return rep_off, rep_mem, rep_p, rep_q, rep_z, n_rep, tab_h, tab_v
    start = rep_off[n_rep]
    rep_off = _grow_i64(rep_off, n_rep + 2)
    rep_mem = _grow_i32(rep_mem, start + k)
    rep_p = _grow_i32(rep_p, n_rep + 1)
    rep_q = _grow_i32(rep_q, n_rep + 1)
    rep_z = _grow_i32(rep_z, n_rep + 1)
    for u in range(k):
        rep_mem[start + u] = buf[u]
    rep_off[n_rep + 1] = start + k
    rep_p[n_rep] = p
    rep_q[n_rep] = q
    rep_z[n_rep] = z
    tab_h[slot] = h
    tab_v[slot] = n_rep
    n_rep += 1
    if 2 * n_rep > tab_h.shape[0]:
        tab_h, tab_v = _rehash(tab_h, tab_v)
    return rep_off, rep_mem, rep_p, rep_q, rep_z, n_rep, tab_h, tab_v


@njit(cache=True)
def _rehash(tab_h, tab_v):
    cap = 2 * tab_h.shape[0]
    nh = np.zeros(cap, dtype=np.uint64)
    nv = np.full(cap, -1, dtype=np.int64)
    mask = cap - 1
    for k in range(tab_h.shape[0]):
        if tab_v[k] >= 0:
            slot = np.int64(tab_h[k] & np.uint64(mask))
            while nv[slot] >= 0:
                slot = (slot + 1) & mask
            nh[slot] = tab_h[k]
            nv[slot] = tab_v[k]
    return nh, nv


# --------------------------------------------------------------------------
# full sweeps
# --------------------------------------------------------------------------

@njit(cache=True)
def _alloc_consensus(n_lines):
    rows = n_lines + 1
    members = np.empty((rows, 8), dtype=np.int32)
    msize = np.zeros(rows, dtype=np.int32)
    Z = np.zeros(rows, dtype=np.int32)
    rowhash = np.zeros(rows, dtype=np.uint64)
    return members, msize, Z, rowhash


@njit(cache=True)
def perturbation_priority(m, cc, kind):
    """Priority of each line's infinitesimal intercept shift (0 = largest).

    Equal to the line position except inside groups of identical lines,
    where the Lower lines are reversed so that the perturbed intercepts
    still descend along the initial order.
    """
    n = m.shape[0]
    prio = np.arange(n).astype(np.int32)
    i = 0
    while i < n:
        j = i
        while j + 1 < n and m[j + 1] == m[i] and cc[j + 1] == cc[i]:
            j += 1
        lo = i
        while lo <= j and kind[lo] == UPPER:
            lo += 1
        for u in range(lo, j + 1):
            prio[u] = lo + j - u
        i = j + 1
    return prio


@njit(cache=True)
def pack_lines(m, cc, kind):
    """Per-line data packed row-wise: slope, intercept, kind, priority.

    SCRATCH_ROWS extra rows at the end serve as predicate workspace.
    """
    n = m.shape[0]
    L = np.zeros((n + SCRATCH_ROWS, 4))
    L[:n, 0] = m
    L[:n, 1] = cc
    L[:n, 2] = kind
    L[:n, 3] = perturbation_priority(m, cc, kind)
    return L


@njit(cache=True)
def _sweep(m, cc, kind, src, pfrm, keys, n_pts, min_frames, plane, gate, gt, gx, geps):
    """Run a full sweep and collect deduplicated reports.

    Returns (rep_off, rep_mem, rep_p, rep_q, rep_z, n_steps, status).
    rep_p/rep_q are line positions; (-1, k) marks a region of the initial
    cut lying between lines k-1 and k.  With ``gate`` each report is first
    reduced as in _gate_row (used when the reports feed a (gt, gx) sweep).
    """
    n_lines = m.shape[0]
    L = pack_lines(m, cc, kind)
    members, msize, Z, rowhash = _alloc_consensus(n_lines)
    members = init_consensus(kind, src, members, msize, Z, rowhash, pfrm, keys)
    mark = np.zeros(n_pts, dtype=np.int64)
    stamp = np.zeros(1, dtype=np.int64)

    rep_off = np.zeros(64, dtype=np.int64)
    rep_mem = np.empty(256, dtype=np.int32)
    rep_p = np.empty(64, dtype=np.int32)
    rep_q = np.empty(64, dtype=np.int32)
    rep_z = np.empty(64, dtype=np.int32)
    n_rep = 0
    tab_h = np.zeros(64, dtype=np.uint64)
    tab_v = np.full(64, -1, dtype=np.int64)
    buf = np.empty(16, dtype=np.int32)
    keep = np.empty(TRIPLE_MAX, dtype=np.bool_)
    w_t = np.empty(TRIPLE_MAX)
    w_x = np.empty(TRIPLE_MAX)
    w_f = np.empty(TRIPLE_MAX, dtype=pfrm.dtype)
    w_i = np.empty(TRIPLE_MAX, dtype=np.int64)

    # regions of the initial cut that are unbounded to the left
    for k in range(1, n_lines):
        if kind[k - 1] == UPPER and kind[k] == LOWER and Z[k] >= min_frames:
            buf = _grow_i32(buf, msize[k])
            nk, h = _gate_row(k, members, msize, pfrm, keys, gate, gt, gx, geps, min_frames,
                              buf, keep, w_t, w_x, w_f, w_i, rowhash)
            if nk:
                rep_off, rep_mem, rep_p, rep_q, rep_z, n_rep, tab_h, tab_v = _report(
                    buf, nk, h, -1, k, Z[k], rep_off, rep_mem, rep_p, rep_q, rep_z, n_rep,
                    tab_h, tab_v, mark, stamp)

    order = np.arange(n_lines).astype(np.int32)
    n_steps = 0
    status = 0
    if plane:
        pos = np.arange(n_lines).astype(np.int32)
        cap = 4 * n_lines + 16
        hu = np.empty(cap, dtype=np.int32)
        hv = np.empty(cap, dtype=np.int32)
        hn = 0
        for j in range(n_lines - 1):
            if m[order[j]] < m[order[j + 1]]:
                hu[hn] = order[j]
                hv[hn] = order[j + 1]
                hn = _heap_push(hu, hv, hn, L)
        while hn > 0:
            a = hu[0]
            b = hv[0]
            hn = _heap_pop(hu, hv, hn, L)
            j = pos[a]
            if j + 1 >= n_lines or order[j + 1] != b:
                continue
            order[j] = b
            order[j + 1] = a
            pos[a] = j + 1
            pos[b] = j
            n_steps += 1
            r = j + 1
            if msize[r] + 2 > members.shape[1]:
                members = _grow_rows(members, msize[r] + 2)
            apply_crossing(r, a, b, kind, src, members, msize, Z, rowhash, pfrm, keys)
            if kind[a] == LOWER and kind[b] == UPPER and Z[r] >= min_frames:
                buf = _grow_i32(buf, msize[r])
                nk, h = _gate_row(r, members, msize, pfrm, keys, gate, gt, gx, geps, min_frames,
                                  buf, keep, w_t, w_x, w_f, w_i, rowhash)
                if nk:
                    rep_off, rep_mem, rep_p, rep_q, rep_z, n_rep, tab_h, tab_v = _report(
                        buf, nk, h, a, b, Z[r], rep_off, rep_mem, rep_p, rep_q, rep_z, n_rep,
                        tab_h, tab_v, mark, stamp)
            if hn + 2 > hu.shape[0]:
                hu = _grow_i32(hu, hn + 2)
                hv = _grow_i32(hv, hn + 2)
            if j >= 1 and m[order[j - 1]] < m[order[j]]:
                hu[hn] = order[j - 1]
                hv[hn] = order[j]
                hn = _heap_push(hu, hv, hn, L)
            if j + 2 < n_lines and m[order[j + 1]] < m[order[j + 2]]:
                hu[hn] = order[j + 1]
                hv[hn] = order[j + 2]
                hn = _heap_push(hu, hv, hn, L)
    else:
        ur = np.empty(n_lines, dtype=np.int32)
        lr = np.empty(n_lines, dtype=np.int32)
        ul = np.empty(n_lines, dtype=np.int32)
        ll = np.empty(n_lines, dtype=np.int32)
        stack = np.empty(n_lines, dtype=np.int32)
        meta = np.zeros(2, dtype=np.int64)
        init_horizon(L, order, ur, lr, ul, ll, stack, meta)
        while True:
            j = ts_step(L, order, ur, lr, ul, ll, stack, meta)
            if j < 0:
                if j == -2:
                    status = -2
                break
            a = order[j + 1]
            b = order[j]
            r = j + 1
            if msize[r] + 2 > members.shape[1]:
                members = _grow_rows(members, msize[r] + 2)
            apply_crossing(r, a, b, kind, src, members, msize, Z, rowhash, pfrm, keys)
            if kind[a] == LOWER and kind[b] == UPPER and Z[r] >= min_frames:
                buf = _grow_i32(buf, msize[r])
                nk, h = _gate_row(r, members, msize, pfrm, keys, gate, gt, gx, geps, min_frames,
                                  buf, keep, w_t, w_x, w_f, w_i, rowhash)
                if nk:
                    rep_off, rep_mem, rep_p, rep_q, rep_z, n_rep, tab_h, tab_v = _report(
                        buf, nk, h, a, b, Z[r], rep_off, rep_mem, rep_p, rep_q, rep_z, n_rep,
                        tab_h, tab_v, mark, stamp)
        n_steps = meta[1]
    return (rep_off[: n_rep + 1].copy(), rep_mem[: rep_off[n_rep]].copy(),
            rep_p[:n_rep].copy(), rep_q[:n_rep].copy(), rep_z[:n_rep].copy(),
            n_steps, status)


# --------------------------------------------------------------------------
# event heap for the plane sweep
# --------------------------------------------------------------------------

@njit(cache=True, _nrt=False)
def _heap_less(i, j, hu, hv, L):
    return cmp_x(hu[i], hv[i], hu[j], hv[j], L) < 0


@njit(cache=True, _nrt=False)
def _heap_swap(i, j, hu, hv):
    t = hu[i]
    hu[i] = hu[j]
    hu[j] = t
    t = hv[i]
    hv[i] = hv[j]
    hv[j] = t


@njit(cache=True, _nrt=False)
def _heap_push(hu, hv, hn, L):
    # element already written at index hn
    i = hn
    while i > 0:
        parent = (i - 1) // 2
        if _heap_less(i, parent, hu, hv, L):
            _heap_swap(i, parent, hu, hv)
            i = parent
        else:
            break
    return hn + 1


@njit(cache=True, _nrt=False)
def _heap_pop(hu, hv, hn, L):
    hn -= 1
    hu[0] = hu[hn]
    hv[0] = hv[hn]
    i = 0
    while True:
        left = 2 * i + 1
        if left >= hn:
            break
        best = left
        right = left + 1
        if right < hn and _heap_less(right, left, hu, hv, L):
            best = right
        if _heap_less(best, i, hu, hv, L):
            _heap_swap(best, i, hu, hv)
            i = best
        else:
            break
    return hn


# --------------------------------------------------------------------------
# line construction and batched second tier
# --------------------------------------------------------------------------

@njit(cache=True)
def offset_lines(absc, ordi, eps):
    """Sorted offset lines for points (absc, ordi).

    Returns (m, c, kind, src) with lines in ascending slope, descending
    intercept, Upper before Lower, ascending point id.
    """
    n = absc.shape[0]
    m0 = np.empty(2 * n)
    c0 = np.empty(2 * n)
    for i in range(n):
        m0[2 * i] = absc[i]
        m0[2 * i + 1] = absc[i]
        c0[2 * i] = ordi[i] - eps
        c0[2 * i + 1] = ordi[i] + eps
    # Upper lines first so identical lines are ordered by perturbed intercept
    perm = np.concatenate((np.arange(1, 2 * n, 2), np.arange(0, 2 * n, 2)))
    if n <= 16:
        # insertion sort: the second tier sorts many tiny line sets
        for i in range(1, 2 * n):
            v = perm[i]
            j = i - 1
            while j >= 0 and (m0[perm[j]] > m0[v] or (m0[perm[j]] == m0[v] and c0[perm[j]] < c0[v])):
                perm[j + 1] = perm[j]
                j -= 1
            perm[j + 1] = v
    else:
        perm = perm[np.argsort(-c0[perm], kind="mergesort")]
        perm = perm[np.argsort(m0[perm], kind="mergesort")]
    m = m0[perm]
    c = c0[perm]
    kind = (perm % 2).astype(np.int8)
    src = (perm // 2).astype(np.int32)
    return m, c, kind, src


@njit(cache=True)
def sweep_points(absc, ordi, frames, eps, min_frames, keys, plane):
    m, c, kind, src = offset_lines(absc, ordi, eps)
    return _sweep(m, c, kind, src, frames, keys, absc.shape[0], min_frames, plane,
                  False, absc, absc, eps)


@njit(cache=True, nogil=True)
def sweep_points_gated(absc, ordi, frames, tt, eps, eps2, min_frames, keys, plane):
    """sweep_points whose reports are reduced for a following (tt, absc) sweep.

    Every report is cut down to the points lying in some eps2-feasible
    (tt, absc) triple of distinct frames and dropped when fewer than
    min_frames frames remain.  Any point set that fits one line within eps
    in (absc, ordi) and within eps2 in (tt, absc) with min_frames frames
    stays inside some reduced report.
    """
    m, c, kind, src = offset_lines(absc, ordi, eps)
    return _sweep(m, c, kind, src, frames, keys, absc.shape[0], min_frames, plane,
                  True, tt, absc, eps2)


TRIPLE_MAX = 48


@njit(cache=True, _nrt=False)
def _triple_mark(ids, t, x, frames, eps, keep, st, sx, sf, si):
    """Flag points lying in some eps-feasible (t, x) triple of distinct frames.

    A second-tier report spanning three or more frames is stabbed by one
    line, so each of its points sits in such a triple; unflagged points can
    be dropped before the sweep.  The minimax residual of three points is
    half the middle point's offset from the chord of the outer two; the
    comparison is slightly permissive so rounding never drops a real
    triple.  st/sx/sf/si are scratch rows.  Returns the number flagged.
    """
    n = ids.shape[0]
    for a in range(n):
        keep[a] = False
        u = ids[a]
        v = t[u]
        j = a - 1
        while j >= 0 and st[j] > v:
            st[j + 1] = st[j]
            sx[j + 1] = sx[j]
            sf[j + 1] = sf[j]
            si[j + 1] = si[j]
            j -= 1
        st[j + 1] = v
        sx[j + 1] = x[u]
        sf[j + 1] = frames[u]
        si[j + 1] = a
    for a in range(n):
        for b in range(a + 1, n):
            if sf[b] == sf[a] or st[b] == st[a]:
                continue
            for c in range(b + 1, n):
                if sf[c] == sf[b] or sf[c] == sf[a] or st[c] == st[b]:
                    continue
                if keep[si[a]] and keep[si[b]] and keep[si[c]]:
                    continue
                span = st[c] - st[a]
                off = (sx[b] - sx[a]) * span - (sx[c] - sx[a]) * (st[b] - st[a])
                slack = 1e-9 * (eps + abs(sx[a]) + abs(sx[b]) + abs(sx[c]) + abs(st[c]) + abs(st[a]))
                if abs(off) <= (2.0 * eps + slack) * span:
                    keep[si[a]] = True
                    keep[si[b]] = True
                    keep[si[c]] = True
    cnt = 0
    for a in range(n):
        if keep[a]:
            cnt += 1
    return cnt


@njit(cache=True, nogil=True)
def tier2_batch(off, mem, t, x, frames, eps, min_frames, keys, plane, reduce=True):
    """Run the (t, x) sweep on every structure of a CSR list.

    With ``reduce`` each structure of at most TRIPLE_MAX points first loses
    the points that belong to no feasible triple (see _triple_mark).
    Returns a CSR list of global point ids plus the parent structure index.
    """
    out_off = np.zeros(off.shape[0] * 2 + 1, dtype=np.int64)
    keep = np.empty(TRIPLE_MAX, dtype=np.bool_)
    w_t = np.empty(TRIPLE_MAX)
    w_x = np.empty(TRIPLE_MAX)
    w_f = np.empty(TRIPLE_MAX, dtype=frames.dtype)
    w_i = np.empty(TRIPLE_MAX, dtype=np.int64)
    out_mem = np.empty(max(16, off[-1] * 2), dtype=np.int32)
    out_parent = np.empty(off.shape[0] * 2 + 1, dtype=np.int32)
    n_out = 0
    status = 0
    for j in range(off.shape[0] - 1):
        ids = mem[off[j]:off[j + 1]]
        if ids.shape[0] < 3:
            continue
        if reduce and ids.shape[0] <= TRIPLE_MAX:
            if _triple_mark(ids, t, x, frames, eps, keep, w_t, w_x, w_f, w_i) < max(3, min_frames):
                continue
            ids = ids[keep[: ids.shape[0]]]
        r_off, r_mem, _, _, _, _, st = sweep_points(
            t[ids], x[ids], frames[ids], eps, min_frames, keys, plane)
        if st != 0:
            status = st
        for k in range(r_off.shape[0] - 1):
            start = out_off[n_out]
            s = r_off[k + 1] - r_off[k]
            out_off = _grow_i64(out_off, n_out + 2)
            out_parent = _grow_i32(out_parent, n_out + 1)
            out_mem = _grow_i32(out_mem, start + s)
            for u in range(s):
                out_mem[start + u] = ids[r_mem[r_off[k] + u]]
            out_off[n_out + 1] = start + s
            out_parent[n_out] = j
            n_out += 1
    return out_off[: n_out + 1].copy(), out_mem[: out_off[n_out]].copy(), out_parent[:n_out].copy(), status
