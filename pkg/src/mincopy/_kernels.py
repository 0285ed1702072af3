"""Hot numerical kernels.

Everything here is written in the numba-compatible numpy subset and wrapped
in ``@njit`` when the numba backend is active (see `backend`).  With
``MINCOPY_DISABLE_NUMBA=1`` the same source runs as plain vectorized numpy.
All kernels are deterministic: parallel loops write disjoint slots and the
simulator draws from counter-based per-trial streams, so results are
bit-identical at any thread count and across both backends.
"""

import numpy as np

from .backend import active_backend

JITTED = active_backend() == "numba"

if JITTED:
    from numba import njit, prange

    def _jit(parallel=False):
        return njit(cache=True, parallel=parallel)

else:
    prange = range

    def _jit(parallel=False):
        def deco(f):
            return f

        return deco


# ---------------------------------------------------------------------------
# small helpers

STATUS_OK = 0
STATUS_SEARCH_FAILED = 1


@_jit()
def _interp_uniform(values, x):
    """Linear interpolation of `values` sampled uniformly on [0, 1]."""
    n = values.shape[0]
    pos = x * (n - 1)
    pos = np.minimum(np.maximum(pos, 0.0), float(n - 1))
    idx = pos.astype(np.int64)
    idx = np.minimum(idx, n - 2)
    frac = pos - idx
    return values[idx] * (1.0 - frac) + values[idx + 1] * frac


@_jit()
def _interp_uniform_scalar(values, x):
    n = values.shape[0]
    pos = x * (n - 1)
    if pos < 0.0:
        pos = 0.0
    if pos > float(n - 1):
        pos = float(n - 1)
    idx = int(pos)
    if idx > n - 2:
        idx = n - 2
    frac = pos - idx
    return values[idx] * (1.0 - frac) + values[idx + 1] * frac


@_jit()
def _interp_circular(g, pos):
    """Interpolate g (uniform on [0, pi)) at fractional index pos, wrapping."""
    n = g.shape[0]
    p = pos % n
    i = int(p)
    frac = p - i
    j = i + 1
    if j == n:
        j = 0
    return g[i] * (1.0 - frac) + g[j] * frac


# ---------------------------------------------------------------------------
# optimal-support tilt search
#
# Given a discretized cost density g over theta in [0, pi), find a tilt
# (a, b) such that g + a cos(2 theta) + b sin(2 theta) attains its minimum
# either at two angles pi/2 apart (projective support) or at three angles
# whose pairwise circular double-gaps are all below pi (three-element
# support).  The tilt is then a dual certificate: any admissible weight
# density integrates g to at least twice the tilted minimum.


@_jit()
def _clusters(h, tol):
    """Runs of {h <= min h + tol}, circularly merged: rows (start, argmin, end).

    A run wrapping past the end keeps its true start index (larger than its
    end).  Rows are sorted by argmin.
    """
    n = h.shape[0]
    m = h.min()
    mask = h <= m + tol
    rows = np.empty((n, 3), dtype=np.int64)
    n_rows = 0
    i = 0
    wrap = mask[0] and mask[n - 1]
    lead_end = -1
    if wrap:
        while i < n and mask[i]:
            i += 1
        lead_end = i - 1
    while i < n:
        if mask[i]:
            start = i
            while i < n and mask[i]:
                i += 1
            best = start
            bv = h[start]
            for k in range(start + 1, i):
                if h[k] < bv:
                    bv = h[k]
                    best = k
            end = i - 1
            if wrap and i == n:
                for k in range(lead_end + 1):
                    if h[k] < bv:
                        bv = h[k]
                        best = k
                end = lead_end
            rows[n_rows, 0] = start
            rows[n_rows, 1] = best
            rows[n_rows, 2] = end
            n_rows += 1
        else:
            i += 1
    if n_rows == 0:  # every point tied: one cluster covering the circle
        rows[0, 0] = 0
        rows[0, 1] = np.argmin(h)
        rows[0, 2] = n - 1
        n_rows = 1
    out = rows[:n_rows].copy()
    order = np.argsort(out[:, 1])
    return out[order]


@_jit()
def _cluster_reps(h, tol):
    """Per-cluster argmin indices, ascending."""
    reps = _clusters(h, tol)[:, 1].copy()
    reps.sort()
    return reps


@_jit()
def _descend(h, i):
    """Walk downhill (circularly) from index i to a local minimum."""
    n = h.shape[0]
    for _ in range(2 * n):
        left = i - 1 if i > 0 else n - 1
        right = i + 1 if i < n - 1 else 0
        if h[left] < h[i] and h[left] <= h[right]:
            i = left
        elif h[right] < h[i]:
            i = right
        else:
            break
    return i


@_jit()
def _line_max(h, d, a_eps):
    """Maximize A -> min(h + A d) over A >= 0 (concave piecewise-linear)."""
    m0 = h.min()
    a_hi = a_eps * 8.0
    for _ in range(200):
        if (h + a_hi * d).min() < m0:
            break
        a_hi *= 2.0
    lo = 0.0
    hi = a_hi
    while hi - lo > a_eps:
        p = lo + (hi - lo) / 3.0
        q = hi - (hi - lo) / 3.0
        if (h + p * d).min() < (h + q * d).min():
            lo = p
        else:
            hi = q
    a_star = 0.5 * (lo + hi)
    return a_star, (h + a_star * d).min()


@_jit()
def _pair_is_half_pi(i, j, n):
    """Grid pair whose angular gap is within one grid step of pi/2."""
    gap = j - i
    if gap < 0:
        gap = -gap
    return abs(2 * gap - n) <= 2


@_jit()
def _triple_feasible(i, j, k, n, dtheta):
    """Strict three-point feasibility: every circular double-gap below pi."""
    if not (i < j < k):
        return False
    g12 = (j - i) * dtheta
    g23 = (k - j) * dtheta
    g13 = (k - i) * dtheta
    half = np.pi / 2.0
    if g12 >= half or g23 >= half or g13 <= half:
        return False
    w1 = np.sin(2.0 * g23)
    w2 = -np.sin(2.0 * g13)
    w3 = np.sin(2.0 * g12)
    return w1 > 1e-12 and w2 > 1e-12 and w3 > 1e-12


@_jit()
def _polish_triple(g, c2, s2, i0, j0, k0, tie_tol, dtheta):
    """Exact-tie tilt for a candidate triple; verify it is the global minimum."""
    n = g.shape[0]
    i, j, k = i0, j0, k0
    a = 0.0
    b = 0.0
    ok = False
    for _ in range(5):
        m00 = c2[i] - c2[j]
        m01 = s2[i] - s2[j]
        m10 = c2[j] - c2[k]
        m11 = s2[j] - s2[k]
        det = m00 * m11 - m01 * m10
        if abs(det) < 1e-14:
            return False, 0.0, 0.0, i, j, k
        r0 = g[j] - g[i]
        r1 = g[k] - g[j]
        a = (r0 * m11 - r1 * m01) / det
        b = (m00 * r1 - m10 * r0) / det
        h = g + a * c2 + b * s2
        v = max(h[i], max(h[j], h[k]))
        if v - h.min() <= tie_tol and _triple_feasible(i, j, k, n, dtheta):
            ok = True
            break
        i2 = _descend(h, i)
        j2 = _descend(h, j)
        k2 = _descend(h, k)
        if i2 == i and j2 == j and k2 == k:
            break
        s = np.empty(3, dtype=np.int64)
        s[0] = i2
        s[1] = j2
        s[2] = k2
        s.sort()
        i, j, k = s[0], s[1], s[2]
        if i == j or j == k:
            return False, 0.0, 0.0, i, j, k
    return ok, a, b, i, j, k


@_jit()
def _polish_pair(g, c2, s2, i0, j0, tie_tol):
    """Equal-value tilt for a near-orthogonal pair; push it to the global min."""
    i, j = i0, j0
    a = 0.0
    b = 0.0
    ok = False
    for _ in range(5):
        w0 = c2[i] - c2[j]
        w1 = s2[i] - s2[j]
        nrm = w0 * w0 + w1 * w1
        if nrm < 1e-14:
            return False, 0.0, 0.0, i, j
        scale = (g[j] - g[i]) / nrm
        a = w0 * scale
        b = w1 * scale
        # the direction leaving both pair values unchanged
        u0 = -w1 / np.sqrt(nrm)
        u1 = w0 / np.sqrt(nrm)
        h = g + a * c2 + b * s2
        d = u0 * c2 + u1 * s2
        phi_scale = max(np.abs(g).max(), 1.0)
        lo = -8.0 * phi_scale
        hi = 8.0 * phi_scale
        while hi - lo > tie_tol / 4.0:
            p = lo + (hi - lo) / 3.0
            q = hi - (hi - lo) / 3.0
            fp = (h + p * d).min() - (h[i] + p * d[i])
            fq = (h + q * d).min() - (h[i] + q * d[i])
            if fp < fq:
                lo = p
            else:
                hi = q
        t = 0.5 * (lo + hi)
        a += t * u0
        b += t * u1
        h = g + a * c2 + b * s2
        v = max(h[i], h[j])
        if v - h.min() <= tie_tol:
            ok = True
            break
        i2 = _descend(h, i)
        j2 = _descend(h, j)
        if i2 == i and j2 == j:
            break
        if i2 == j2:
            return False, 0.0, 0.0, i, j
        if i2 > j2:
            i2, j2 = j2, i2
        i, j = i2, j2
    return ok, a, b, i, j


@_jit()
def _try_conditions(g, c2, s2, h, reps, val_tol, tie_tol, dtheta):
    """Try to certify an admissible support in the current minimizer set.

    Candidates are certified by re-solving their exact tie tilt and checking
    it stays the global minimum; among certified candidates the one whose
    realizable measurement value exceeds twice the tilted minimum by the
    least wins, and only within the grid-slack tolerance.

    Returns (found, cond, i1, i2, i3, a, b).
    """
    n = g.shape[0]
    r = reps.shape[0]
    accept_tol = val_tol
    best_excess = np.inf
    bcond = 0
    b1 = -1
    b2 = -1
    b3 = -1
    ba = 0.0
    bb = 0.0
    # projective pairs: any minimizer whose pi/2 partner is also a minimizer
    mask = h <= h.min() + val_tol
    for hw in range(n // 2, n // 2 + 2):
        pair_ok = mask[: n - hw] & mask[hw:]
        if np.any(pair_ok):
            depth = np.where(pair_ok, np.maximum(h[: n - hw], h[hw:]), np.inf)
            i = int(np.argmin(depth))
            ok, a, b, i2, j2 = _polish_pair(g, c2, s2, i, i + hw, tie_tol)
            if ok and _pair_is_half_pi(i2, j2, n):
                hc = g + a * c2 + b * s2
                v = hc[i2] + _interp_circular(hc, i2 + n / 2.0)
                excess = v - 2.0 * hc.min()
                if excess < best_excess:
                    best_excess = excess
                    bcond = 1
                    b1 = i2
                    b2 = j2
                    b3 = -1
                    ba = a
                    bb = b
    # feasible triples from the candidate pool, tried in depth order
    max_cand = 128
    cand = np.empty((max_cand, 3), dtype=np.int64)
    depth = np.empty(max_cand)
    n_cand = 0
    for p in range(r):
        for q in range(p + 1, r):
            for s in range(q + 1, r):
                i, j, k = reps[p], reps[q], reps[s]
                if _triple_feasible(i, j, k, n, dtheta) and n_cand < max_cand:
                    cand[n_cand, 0] = i
                    cand[n_cand, 1] = j
                    cand[n_cand, 2] = k
                    depth[n_cand] = max(h[i], max(h[j], h[k]))
                    n_cand += 1
    tried = 0
    while n_cand > 0 and tried < 12:
        best_c = 0
        for c in range(1, n_cand):
            if depth[c] < depth[best_c]:
                best_c = c
        if not np.isfinite(depth[best_c]):
            break
        ok, a, b, i2, j2, k2 = _polish_triple(
            g, c2, s2, cand[best_c, 0], cand[best_c, 1], cand[best_c, 2], tie_tol, dtheta
        )
        depth[best_c] = np.inf
        tried += 1
        if ok:
            hc = g + a * c2 + b * s2
            w1, w2, w3 = _triple_masses(i2 * dtheta, j2 * dtheta, k2 * dtheta)
            v = w1 * hc[i2] + w2 * hc[j2] + w3 * hc[k2]
            excess = v - 2.0 * hc.min()
            if excess < best_excess:
                best_excess = excess
                bcond = 2
                b1 = i2
                b2 = j2
                b3 = k2
                ba = a
                bb = b
            if best_excess <= 16.0 * tie_tol:
                break
    if best_excess <= accept_tol:
        return True, bcond, b1, b2, b3, ba, bb
    return False, 0, -1, -1, -1, 0.0, 0.0


@_jit()
def _select_pair(h, reps, n):
    """Tilt pair: smallest gap above pi/2 if one exists, else the widest gap."""
    r = reps.shape[0]
    bi = -1
    bj = -1
    best_gap = -1.0
    # narrowest gap exceeding pi/2
    for p in range(r):
        for q in range(p + 1, r):
            gap = reps[q] - reps[p]
            if 2 * gap > n:
                if bi < 0 or gap < best_gap:
                    best_gap = gap
                    bi = reps[p]
                    bj = reps[q]
    if bi >= 0:
        return bi, bj
    # otherwise the widest gap
    for p in range(r):
        for q in range(p + 1, r):
            gap = reps[q] - reps[p]
            if gap > best_gap:
                best_gap = gap
                bi = reps[p]
                bj = reps[q]
    return bi, bj


@_jit()
def support_search(g, c2, s2, tol):
    """Find the optimal-support tilt for cost density g on a uniform theta grid.

    Returns (status, condition, i1, i2, i3, a, b); support indices ascend,
    i3 == -1 for projective supports.  `tol` <= 0 selects the default
    admission tolerance 10 * range(g) * dtheta.
    """
    n = g.shape[0]
    dtheta = np.pi / n
    gmax = g.max()
    gmin = g.min()
    scale = gmax - gmin
    if scale < 1e-12:
        return STATUS_OK, 1, 0, n // 2, -1, 0.0, 0.0
    val_tol = tol if tol > 0.0 else 10.0 * scale * dtheta
    tie_tol = max(1e-9 * scale, 1e-14)

    # balance theta = 0 against theta = pi/2, then tilt the sine coefficient
    # until both halves carry a global minimizer
    a = (g[n // 2] - g[0]) / 2.0
    h0 = g + a * c2
    half = (n + 1) // 2
    bb = max(scale, 1e-3)
    lo = -bb
    hi = bb
    for _ in range(80):
        psi_lo = (h0[:half] + lo * s2[:half]).min() - (h0[half:] + lo * s2[half:]).min()
        psi_hi = (h0[:half] + hi * s2[:half]).min() - (h0[half:] + hi * s2[half:]).min()
        if psi_lo <= 0.0 and psi_hi >= 0.0:
            break
        if psi_lo > 0.0:
            lo *= 2.0
        if psi_hi < 0.0:
            hi *= 2.0
    b = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        psi = (h0[:half] + mid * s2[:half]).min() - (h0[half:] + mid * s2[half:]).min()
        if psi > 0.0:
            hi = mid
        else:
            lo = mid
        b = 0.5 * (lo + hi)
        if hi - lo < tie_tol and abs(psi) < val_tol:
            break
    h = h0 + b * s2

    a_eps = tie_tol / 4.0
    for _ in range(120):
        # march decisions use crisp ties; the loose tolerance only widens
        # condition acceptance (cluster ends included so wide flat runs
        # still offer support candidates)
        reps = _cluster_reps(h, tie_tol * 4.0)
        loose = _clusters(h, val_tol)
        reps_union = np.unique(np.concatenate((reps, loose.ravel())))
        if reps_union.shape[0] > 10:
            # keep the deepest candidates so the true support survives pruning
            order = np.argsort(h[reps_union])
            reps_union = reps_union[order[:10]]
            reps_union.sort()
        found, cond, i1, i2, i3, pa, pb = _try_conditions(
            g, c2, s2, h, reps_union, val_tol, tie_tol, dtheta
        )
        if found:
            return STATUS_OK, cond, i1, i2, i3, pa, pb

        t1 = reps[0]
        t2 = reps[0]
        if reps.shape[0] == 1:
            phi = 2.0 * reps[0] * dtheta
            sign = 1.0
        else:
            t1, t2 = _select_pair(h, reps, n)
            phi = (t1 + t2) * dtheta
            sign = -1.0 if 2 * (t2 - t1) > n else 1.0
        d = sign * np.cos(2.0 * np.arange(n) * dtheta - phi)

        a_star, _ = _line_max(h, d, a_eps)
        if a_star <= a_eps * 2.0:
            # no usable ascent along this direction; nudge with the raw axes
            moved = False
            for axis in range(4):
                if axis == 0:
                    d2 = c2.copy()
                elif axis == 1:
                    d2 = -c2
                elif axis == 2:
                    d2 = s2.copy()
                else:
                    d2 = -s2
                a2, m2 = _line_max(h, d2, a_eps)
                if a2 > a_eps * 2.0 and m2 > h.min() + tie_tol:
                    h = h + a2 * d2
                    if axis == 0:
                        a += a2
                    elif axis == 1:
                        a -= a2
                    elif axis == 2:
                        b += a2
                    else:
                        b -= a2
                    moved = True
                    break
            if not moved:
                return STATUS_SEARCH_FAILED, 0, reps[0], -1, -1, a, b
            continue

        # if the tracked pair's gap crosses the pi/2 window before the tie
        # event, commit at the crossing instead
        a_commit = a_star
        if reps.shape[0] >= 2:
            g0 = 2 * (t2 - t1) - n
            ht = h + a_star * d
            u1 = _descend(ht, t1)
            u2 = _descend(ht, t2)
            if u1 > u2:
                u1, u2 = u2, u1
            g1 = 2 * (u2 - u1) - n
            if (g0 > 2 and g1 < -2) or (g0 < -2 and g1 > 2):
                lo_a = 0.0
                hi_a = a_star
                sign0 = g0 > 0
                for _ in range(80):
                    mid = 0.5 * (lo_a + hi_a)
                    hm = h + mid * d
                    v1 = _descend(hm, t1)
                    v2 = _descend(hm, t2)
                    if v1 > v2:
                        v1, v2 = v2, v1
                    gm = 2 * (v2 - v1) - n
                    if abs(gm) <= 2:
                        a_commit = mid
                        break
                    if (gm > 0) == sign0:
                        lo_a = mid
                    else:
                        hi_a = mid
                    a_commit = hi_a

        h = h + a_commit * d
        a += sign * a_commit * np.cos(phi)
        b += sign * a_commit * np.sin(phi)

    reps = _cluster_reps(h, val_tol)
    return STATUS_SEARCH_FAILED, 0, reps[0], -1, -1, a, b


# ---------------------------------------------------------------------------
# Bellman sweep kernels


@_jit()
def _triple_masses(th1, th2, th3):
    s12 = np.sin(2.0 * (th2 - th1))
    s23 = np.sin(2.0 * (th3 - th2))
    s31 = np.sin(2.0 * (th1 - th3))
    denom = s12 + s23 + s31
    return 2.0 * s23 / denom, 2.0 * s31 / denom, 2.0 * s12 / denom


@_jit(parallel=True)
def goal_sweep_exact(values, stop, t0, t1, search_tol):
    """One exact local Bellman sweep: full support search at every prior.

    Returns (new_values, kinds, angles, weights, status) where status[j]
    flags a failed search at grid point j.
    """
    G = values.shape[0]
    T = t0.shape[0]
    dtheta = np.pi / T
    grid = np.arange(T) * dtheta
    c2 = np.cos(2.0 * grid)
    s2 = np.sin(2.0 * grid)
    new_values = np.zeros(G)
    kinds = np.zeros(G, dtype=np.int8)
    angles = np.zeros((G, 3))
    weights = np.zeros((G, 3))
    status = np.zeros(G, dtype=np.int8)
    for j in prange(G):
        if stop[j]:
            continue
        q = j / (G - 1.0)
        p = q * t0 + (1.0 - q) * t1
        qt = q * t0 / np.maximum(p, 1e-300)
        g = p * _interp_uniform(values, qt)
        st, cond, i1, i2, i3, _a, _b = support_search(g, c2, s2, search_tol)
        if st != STATUS_OK:
            status[j] = 1
            continue
        if cond == 1:
            th1 = i1 * dtheta
            val = g[i1] + _interp_circular(g, i1 + T / 2.0)
            kinds[j] = 1
            angles[j, 0] = th1
            angles[j, 1] = th1 + np.pi / 2.0
            weights[j, 0] = 1.0
            weights[j, 1] = 1.0
        else:
            th1 = i1 * dtheta
            th2 = i2 * dtheta
            th3 = i3 * dtheta
            w1, w2, w3 = _triple_masses(th1, th2, th3)
            val = w1 * g[i1] + w2 * g[i2] + w3 * g[i3]
            kinds[j] = 2
            angles[j, 0] = th1
            angles[j, 1] = th2
            angles[j, 2] = th3
            weights[j, 0] = w1
            weights[j, 1] = w2
            weights[j, 2] = w3
        new_values[j] = 1.0 + val
    return new_values, kinds, angles, weights, status


@_jit()
def _g_at_angle(theta, q, r0_00, r0_01, r0_11, r1_00, r1_01, r1_11, values):
    """Cost density at an arbitrary angle, evaluated exactly from the states."""
    c = np.cos(theta)
    s = np.sin(theta)
    a = r0_00 * c * c + 2.0 * r0_01 * c * s + r0_11 * s * s
    b = r1_00 * c * c + 2.0 * r1_01 * c * s + r1_11 * s * s
    p = q * a + (1.0 - q) * b
    if p < 1e-300:
        return 0.0
    return p * _interp_uniform_scalar(values, q * a / p)


@_jit(parallel=True)
def goal_sweep_fast(
    values, stop, t0, t1, r0, r1, cached_kinds, cached_angles, cached_weights
):
    """Accelerated local sweep: exact projective pairs plus cached 3-point supports."""
    G = values.shape[0]
    T = t0.shape[0]
    dtheta = np.pi / T
    new_values = np.zeros(G)
    kinds = np.zeros(G, dtype=np.int8)
    angles = np.zeros((G, 3))
    weights = np.zeros((G, 3))
    r0_00 = r0[0, 0]
    r0_01 = r0[0, 1]
    r0_11 = r0[1, 1]
    r1_00 = r1[0, 0]
    r1_01 = r1[0, 1]
    r1_11 = r1[1, 1]
    for j in prange(G):
        if stop[j]:
            continue
        q = j / (G - 1.0)
        p1 = q * t0 + (1.0 - q) * t1
        q1 = q * t0 / np.maximum(p1, 1e-300)
        p2 = 1.0 - p1
        q2 = q * (1.0 - t0) / np.maximum(p2, 1e-300)
        cost = p1 * _interp_uniform(values, q1) + p2 * _interp_uniform(values, q2)
        ib = np.argmin(cost)
        val = cost[ib]
        kinds[j] = 1
        angles[j, 0] = ib * dtheta
        angles[j, 1] = ib * dtheta + np.pi / 2.0
        angles[j, 2] = 0.0
        weights[j, 0] = 1.0
        weights[j, 1] = 1.0
        weights[j, 2] = 0.0
        if cached_kinds[j] == 2:
            vc = 0.0
            for k in range(3):
                vc += cached_weights[j, k] * _g_at_angle(
                    cached_angles[j, k], q,
                    r0_00, r0_01, r0_11, r1_00, r1_01, r1_11, values,
                )
            if vc < val:
                val = vc
                kinds[j] = 2
                for k in range(3):
                    angles[j, k] = cached_angles[j, k]
                    weights[j, k] = cached_weights[j, k]
        new_values[j] = 1.0 + val
    return new_values, kinds, angles, weights


@_jit(parallel=True)
def goac_sweep(values, stop, tl0f, tl1f, tc0f, tc1f):
    """One sweep mixing a local projective arm and a two-copy collective arm.

    tl0f/tl1f are flattened (T_local * 2) Born-trace tables of the local
    elements against each model state; tc0f/tc1f the (T_coll * 4) collective
    tables.  Collective tables may be empty (local-only solve).  Ties prefer
    the local arm.
    """
    G = values.shape[0]
    TL = tl0f.shape[0] // 2
    TC = tc0f.shape[0] // 4
    new_values = np.zeros(G)
    arms = np.zeros(G, dtype=np.int8)
    theta_idx = np.zeros(G, dtype=np.int64)
    for j in prange(G):
        if stop[j]:
            continue
        q = j / (G - 1.0)
        p = q * tl0f + (1.0 - q) * tl1f
        qk = q * tl0f / np.maximum(p, 1e-300)
        contrib = p * _interp_uniform(values, qk)
        cost_l = contrib[0::2] + contrib[1::2]
        il = np.argmin(cost_l)
        best = 1.0 + cost_l[il]
        arm = 1
        idx = il
        if TC > 0:
            pc = q * tc0f + (1.0 - q) * tc1f
            qc = q * tc0f / np.maximum(pc, 1e-300)
            cc = pc * _interp_uniform(values, qc)
            cost_c = cc[0::4] + cc[1::4] + cc[2::4] + cc[3::4]
            ic = np.argmin(cost_c)
            if 2.0 + cost_c[ic] < best:
                best = 2.0 + cost_c[ic]
                arm = 2
                idx = ic
        new_values[j] = best
        arms[j] = arm
        theta_idx[j] = idx
    return new_values, arms, theta_idx


@_jit()
def fixed_sweep(values, stop, ak, bk, n_copies):
    """One sweep under a single repeated measurement (element traces ak/bk)."""
    G = values.shape[0]
    q = np.arange(G) / (G - 1.0)
    new = np.full(G, float(n_copies))
    for k in range(ak.shape[0]):
        p = q * ak[k] + (1.0 - q) * bk[k]
        qk = q * ak[k] / np.maximum(p, 1e-300)
        new = new + p * _interp_uniform(values, qk)
    return np.where(stop, 0.0, new)


# ---------------------------------------------------------------------------
# Monte Carlo simulation
#
# Counter-based per-trial streams: every uniform is a pure function of
# (seed, trial, counter), so results are independent of execution order,
# thread count and backend.

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U53 = 1.0 / 9007199254740992.0


@_jit()
def _mix64(z):
    z = z + _GAMMA
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@_jit()
def _stream_uniform(seed, trials, counter):
    """One uniform in [0, 1) per trial id for the given draw counter."""
    z = _mix64(np.full(trials.shape[0], seed, dtype=np.uint64))
    z = _mix64(z ^ trials)
    z = _mix64(z ^ np.full(trials.shape[0], counter, dtype=np.uint64))
    return (z >> np.uint64(11)).astype(np.float64) * _U53


if JITTED:

    @njit(cache=True)
    def _scatter_f8(dest, idx, src):
        for i in range(idx.shape[0]):
            dest[idx[i]] = src[i]

    @njit(cache=True)
    def _scatter_i8(dest, idx, src):
        for i in range(idx.shape[0]):
            dest[idx[i]] = src[i]

else:

    def _scatter_f8(dest, idx, src):
        dest[idx] = src

    _scatter_i8 = _scatter_f8


@_jit()
def simulate_batch(
    q0,
    eps,
    n_trials,
    seed,
    ptab,      # (C * G * K,) outcome probabilities per component and grid row
    compcum,   # (2 * G * C,) cumulative component weights per true state and row
    atab,      # (G * K,) model traces against rho0 for the posterior update
    btab,      # (G * K,) model traces against rho1
    ncopies,   # (G,) copies consumed per round at each grid row
    n_comp,
    n_out,
    copy_cap,
    j_lo,      # first and last undecided grid rows: lookups clamp into this
    j_hi,      # band so boundary-hugging priors still get a measurement
):
    """Run n_trials sequential trials; returns per-trial outcome arrays.

    Output: (status, copies, correct, decisions, true_states, final_q);
    status 1 means some trial hit the copy cap (runaway).
    """
    G = ncopies.shape[0]
    K = n_out
    C = n_comp
    copies = np.zeros(n_trials, dtype=np.int64)
    correct = np.zeros(n_trials, dtype=np.int8)
    decisions = np.zeros(n_trials, dtype=np.int8)
    final_q = np.zeros(n_trials)
    ids = np.arange(n_trials).astype(np.uint64)

    u = _stream_uniform(np.uint64(seed), ids, np.uint64(0))
    true_all = (u >= q0).astype(np.int8)

    if min(q0, 1.0 - q0) <= eps:
        dec = np.int8(1) if q0 <= eps else np.int8(0)
        decisions = decisions + dec
        correct = (decisions == true_all).astype(np.int8)
        final_q = final_q + q0
        return STATUS_OK, copies, correct, decisions, true_all, final_q

    alive = ids.copy()
    q = np.full(n_trials, q0)
    cop = np.zeros(n_trials, dtype=np.int64)
    tru = true_all.copy()
    status = STATUS_OK
    max_rounds = copy_cap + 1
    r = 1
    while alive.shape[0] > 0:
        if r > max_rounds:
            status = STATUS_SEARCH_FAILED
            break
        jj = (q * (G - 1.0) + 0.5).astype(np.int64)
        jj = np.minimum(np.maximum(jj, j_lo), j_hi)
        if C > 1:
            uc = _stream_uniform(np.uint64(seed), alive, np.uint64(4 * r + 1))
            comp = np.zeros(alive.shape[0], dtype=np.int64)
            base_c = (tru.astype(np.int64) * G + jj) * C
            for c in range(C - 1):
                comp = comp + (uc >= compcum[base_c + c]).astype(np.int64)
        else:
            comp = np.zeros(alive.shape[0], dtype=np.int64)
        uo = _stream_uniform(np.uint64(seed), alive, np.uint64(4 * r))
        base_p = (comp * G + jj) * K
        ksel = np.zeros(alive.shape[0], dtype=np.int64)
        acc = np.zeros(alive.shape[0])
        for k in range(K - 1):
            acc = acc + ptab[base_p + k]
            ksel = ksel + (uo >= acc).astype(np.int64)
        base_m = jj * K + ksel
        a = atab[base_m]
        b = btab[base_m]
        den = q * a + (1.0 - q) * b
        q = np.where(den > 0.0, q * a / np.maximum(den, 1e-300), q)
        cop = cop + ncopies[jj]
        stopped = (np.minimum(q, 1.0 - q) <= eps) | (cop >= copy_cap)
        if np.any(stopped):
            sid = alive[stopped].astype(np.int64)
            sq = q[stopped]
            scop = cop[stopped]
            stru = tru[stopped]
            dec = (sq <= eps).astype(np.int8)
            _scatter_i8(copies, sid, scop)
            _scatter_f8(final_q, sid, sq)
            _scatter_i8(decisions, sid, dec)
            _scatter_i8(correct, sid, (dec == stru).astype(np.int8))
            if np.any(scop >= copy_cap):
                status = STATUS_SEARCH_FAILED
            keep = ~stopped
            alive = alive[keep]
            q = q[keep]
            cop = cop[keep]
            tru = tru[keep]
        r += 1
    return status, copies, correct, decisions, true_all, final_q
