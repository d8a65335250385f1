"""Pure-numpy reference kernels.

Every arithmetic step mirrors the compiled kernels in ``_kernels_numba`` so
both backends produce bit-identical weights, passage times and labels.
The numpy path is slow (one Python iteration per anti-diagonal) but has no
compiler dependency.
"""
from __future__ import annotations

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
MIX1 = np.uint64(0xBF58476D1CE4E5B9)
MIX2 = np.uint64(0x94D049BB133111EB)
LOW32 = np.uint64(0xFFFFFFFF)

# fdlibm-style log; shared with the compiled path so results agree bitwise
LN2_HI = 6.93147180369123816490e-01
LN2_LO = 1.90821492927058770002e-10
LG1 = 6.666666666666735130e-01
LG2 = 3.999999999940941908e-01
LG3 = 2.857142874366239149e-01
LG4 = 2.222219843214978396e-01
LG5 = 1.818357216161805012e-01
LG6 = 1.531383769920937332e-01
LG7 = 1.479819860511658591e-01
SQRT2_MANT = 0x6A09E667F3BCD
MANT_MASK = (1 << 52) - 1
TWO_M53 = 2.0 ** -53

NEG_INF = -np.inf


def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * MIX1
    z = (z ^ (z >> np.uint64(27))) * MIX2
    return z ^ (z >> np.uint64(31))


def site_codes(key, k, l):
    """Odd 53-bit integer codes for lattice sites; uniform is code * 2**-53."""
    k = np.asarray(k, dtype=np.int64).view(np.uint64)
    l = np.asarray(l, dtype=np.int64).view(np.uint64)
    packed = ((k & LOW32) << np.uint64(32)) | (l & LOW32)
    with np.errstate(over="ignore"):
        z = packed * GOLDEN + np.uint64(key)
        x = _mix(_mix(z))
    return ((x >> np.uint64(11)) | np.uint64(1)).astype(np.int64)


def neglog_codes(codes):
    """-ln(code * 2**-53) for odd codes in [1, 2**53)."""
    f = np.asarray(codes, dtype=np.int64).astype(np.float64)
    bits = f.view(np.int64)
    mant = bits & MANT_MASK
    big = (mant > SQRT2_MANT).astype(np.int64)
    r = (mant | ((1023 - big) << 52)).view(np.float64)
    kk = ((bits >> 52) - 1076 + big).astype(np.float64)
    f = r - 1.0
    s = f / (2.0 + f)
    z = s * s
    w = z * z
    t1 = w * (LG2 + w * (LG4 + w * LG6))
    t2 = z * (LG1 + w * (LG3 + w * (LG5 + w * LG7)))
    rr = t2 + t1
    hfsq = 0.5 * f * f
    return ((hfsq - (s * (hfsq + rr) + kk * LN2_LO)) - f) - kk * LN2_HI


def level_weights(key, d, k0, count):
    k = np.arange(k0, k0 + count, dtype=np.int64)
    return neglog_codes(site_codes(key, k, d - k))


def _pick(west, south, lab_w, lab_s):
    return (south > west) | ((south == west) & (lab_s >= lab_w))


def sweep_quadrant(key, D, kA, kB, bx, by, aux_x, aux_y, full):
    """Boundary-model wavefront sweep; see the compiled twin for layout."""
    M = bx.shape[0]
    nlev = D + 1
    klo = np.maximum(0, np.arange(nlev) - D + kA).astype(np.int64)
    khi = np.minimum(np.arange(nlev), kB).astype(np.int64)
    counts = khi - klo + 1
    offsets = np.zeros(nlev + 1, dtype=np.int64)
    offsets[1:] = np.cumsum(counts)
    total = int(offsets[-1]) if full else 0
    fv = np.empty((M, total))
    fz = np.empty((M, total), dtype=np.int64)
    fa = np.empty((M, total), dtype=np.int64)

    width = kB + 3
    prev = np.full((M, width), NEG_INF)
    prev_z = np.zeros((M, width), dtype=np.int64)
    prev_a = np.zeros((M, width), dtype=np.int64)
    for d in range(nlev):
        lo, hi = int(klo[d]), int(khi[d])
        cur = np.full((M, width), NEG_INF)
        cur_z = np.zeros((M, width), dtype=np.int64)
        cur_a = np.zeros((M, width), dtype=np.int64)
        blo, bhi = max(lo, 1), min(hi, d - 1)
        if bhi >= blo:
            w = level_weights(key, d, blo, bhi - blo + 1)
            west = prev[:, blo:bhi + 1]
            south = prev[:, blo + 1:bhi + 2]
            zw = prev_z[:, blo:bhi + 1]
            zs = prev_z[:, blo + 1:bhi + 2]
            take_s = _pick(west, south, zw, zs)
            cur[:, blo + 1:bhi + 2] = w + np.where(take_s, south, west)
            cur_z[:, blo + 1:bhi + 2] = np.where(take_s, zs, zw)
            cur_a[:, blo + 1:bhi + 2] = np.where(
                take_s, prev_a[:, blo + 1:bhi + 2], prev_a[:, blo:bhi + 1])
        if lo == 0:
            cur[:, 1] = by[:, d]
            cur_z[:, 1] = -d
            cur_a[:, 1] = aux_y[:, d]
        if hi == d and d > 0:
            cur[:, d + 1] = bx[:, d]
            cur_z[:, d + 1] = d
            cur_a[:, d + 1] = aux_x[:, d]
        if full:
            o = offsets[d]
            fv[:, o:o + counts[d]] = cur[:, lo + 1:hi + 2]
            fz[:, o:o + counts[d]] = cur_z[:, lo + 1:hi + 2]
            fa[:, o:o + counts[d]] = cur_a[:, lo + 1:hi + 2]
        prev, prev_z, prev_a = cur, cur_z, cur_a
    top = slice(kA + 1, kB + 2)
    return (prev[:, top].copy(), prev_z[:, top].copy(), prev_a[:, top].copy(),
            fv, fz, fa, offsets, klo, khi)


def curve_level_bounds(D, kA, kB, jlo, jhi, d0):
    d = np.arange(d0, D + 1, dtype=np.int64)
    lo = np.maximum(d - D + kA, -((-(d + jlo)) // 2))
    hi = np.minimum(kB, (d + jhi) // 2)
    return lo, hi


def corner_mask(s):
    s = np.asarray(s, dtype=np.int64)
    mask = np.zeros(s.size, dtype=np.uint8)
    if s.size >= 3:
        inner = (s[:-2] == s[1:-1] + 1) & (s[2:] == s[1:-1] + 1)
        mask[1:-1] = inner
    return mask


def sweep_curve(key, D, kA, kB, jlo, s, allowed, outside_only, full):
    """Multi-source sweep from the concave corners of a down-right path."""
    s = np.asarray(s, dtype=np.int64)
    J = s.size
    jhi = jlo + J - 1
    seed_ok = corner_mask(s) & np.asarray(allowed, dtype=np.uint8)
    d0 = int(s.min()) + 2
    if d0 > D:
        d0 = D
    klo, khi = curve_level_bounds(D, kA, kB, jlo, jhi, d0)
    nlev = D - d0 + 1
    counts = np.maximum(khi - klo + 1, 0)
    offsets = np.zeros(nlev + 1, dtype=np.int64)
    offsets[1:] = np.cumsum(counts)
    total = int(offsets[-1]) if full else 0
    fv = np.empty(total)
    fk = np.empty(total, dtype=np.int64)

    kbase = int(klo.min()) - 1
    width = int(khi.max()) - kbase + 2
    prev = np.full(width, NEG_INF)
    prev_k = np.zeros(width, dtype=np.int64)
    nx, ny = max(kB, 0), max(D - kA, 0)  # targets may sit off the quadrant
    axis_x = np.zeros(nx + 1)
    axis_y = np.zeros(ny + 1)
    lab_x = np.zeros(nx + 1, dtype=np.int64)
    lab_y = np.zeros(ny + 1, dtype=np.int64)
    clipped = False
    for li in range(nlev):
        d = d0 + li
        lo, hi = int(klo[li]), int(khi[li])
        cur = np.full(width, NEG_INF)
        cur_k = np.zeros(width, dtype=np.int64)
        if hi >= lo:
            ks = np.arange(lo, hi + 1, dtype=np.int64)
            if outside_only and d >= 2:
                keep = (ks <= 0) | (ks >= d)
                ks = ks[keep]
            if ks.size:
                w = neglog_codes(site_codes(key, ks, d - ks))
                jidx = 2 * ks - d - jlo
                sj = s[jidx]
                idx = ks - kbase
                west, south = prev[idx - 1], prev[idx]
                kw, ksl = prev_k[idx - 1], prev_k[idx]
                take_s = _pick(west, south, kw, ksl)
                val = w + np.where(take_s, south, west)
                lab = np.where(take_s, ksl, kw)
                seed = (d == sj + 2) & (seed_ok[jidx] == 1)
                val = np.where(seed, w, val)
                lab = np.where(seed, jidx + jlo, lab)
                below = d <= sj
                val = np.where(below, NEG_INF, val)
                lab = np.where(below, 0, lab)
                cur[idx] = val
                cur_k[idx] = lab
                on_x = ks == d
                if on_x.any() and 0 <= d <= nx and not below[on_x][0]:
                    axis_x[d] = val[on_x][0]
                    lab_x[d] = lab[on_x][0]
                on_y = ks == 0
                if on_y.any() and 0 <= d <= ny and not below[on_y][0]:
                    axis_y[d] = val[on_y][0]
                    lab_y[d] = lab[on_y][0]
            # window edge check: the light cone reaches past the window
            if d - D + kA < lo and 2 * lo - d - jlo == 0 and d > s[0] \
                    and (not outside_only or lo <= 0 or lo >= d):
                clipped = True
            if kB > hi and 2 * hi - d - jlo == J - 1 and d > s[J - 1] \
                    and (not outside_only or hi <= 0 or hi >= d):
                clipped = True
        if full:
            o = offsets[li]
            if counts[li]:
                fv[o:o + counts[li]] = cur[lo - kbase:hi - kbase + 1]
                fk[o:o + counts[li]] = cur_k[lo - kbase:hi - kbase + 1]
        prev, prev_k = cur, cur_k
    top_v = prev[kA - kbase:kB - kbase + 1].copy()
    top_k = prev_k[kA - kbase:kB - kbase + 1].copy()
    return (top_v, top_k, axis_x, axis_y, lab_x, lab_y, fv, fk, offsets,
            klo, khi, d0, clipped)
