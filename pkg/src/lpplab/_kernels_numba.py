"""Compiled wavefront kernels (numba).

Arithmetic is kept operation-for-operation identical to ``_kernels_numpy``.
``error_model="numpy"`` drops the zero-division branch so the log pass
vectorises; weight generation is split into three passes over separate
buffers for the same reason.
"""
from __future__ import annotations

import numpy as np
from numba import njit

from ._kernels_numpy import (LG1, LG2, LG3, LG4, LG5, LG6, LG7, LN2_HI,
                             LN2_LO, MANT_MASK, SQRT2_MANT)

_U = np.uint64
_I = np.int64
GOLDEN = _U(0x9E3779B97F4A7C15)
MIX1 = _U(0xBF58476D1CE4E5B9)
MIX2 = _U(0x94D049BB133111EB)
LOW32 = _U(0xFFFFFFFF)
_MANT = _I(MANT_MASK)
_SQ2 = _I(SQRT2_MANT)
NEG_INF = -np.inf

_opts = dict(cache=True, error_model="numpy", nogil=True)


@njit(inline="always")
def _mix(z):
    z = (z ^ (z >> _U(30))) * MIX1
    z = (z ^ (z >> _U(27))) * MIX2
    return z ^ (z >> _U(31))


@njit(inline="always")
def _code(key, k, l):
    packed = ((_U(k) & LOW32) << _U(32)) | (_U(l) & LOW32)
    x = _mix(_mix(packed * GOLDEN + key))
    return _I(x >> _U(11)) | _I(1)


@njit(**_opts)
def fill_weights(key, d, k0, count, out, ibuf, kbuf):
    """Weights of sites (k, d-k), k = k0..k0+count-1, written to out[:count]."""
    for i in range(count):
        k = k0 + i
        out[i] = np.float64(_code(key, k, d - k))
    bits = out.view(np.int64)
    for i in range(count):
        b = bits[i]
        m = b & _MANT
        big = _I(m > _SQ2)
        ibuf[i] = m | ((_I(1023) - big) << 52)
        kbuf[i] = np.float64((b >> 52) - _I(1076) + big)
    r = ibuf.view(np.float64)
    for i in range(count):
        kk = kbuf[i]
        f = r[i] - 1.0
        s = f / (2.0 + f)
        z = s * s
        w = z * z
        t1 = w * (LG2 + w * (LG4 + w * LG6))
        t2 = z * (LG1 + w * (LG3 + w * (LG5 + w * LG7)))
        rr = t2 + t1
        hfsq = 0.5 * f * f
        out[i] = ((hfsq - (s * (hfsq + rr) + kk * LN2_LO)) - f) - kk * LN2_HI


@njit(**_opts)
def site_codes_flat(key, ks, ls, out):
    for i in range(ks.size):
        out[i] = _code(key, ks[i], ls[i])


@njit(**_opts)
def sweep_quadrant(key, D, kA, kB, bx, by, aux_x, aux_y, full):
    M = bx.shape[0]
    nlev = D + 1
    klo = np.empty(nlev, np.int64)
    khi = np.empty(nlev, np.int64)
    offsets = np.zeros(nlev + 1, np.int64)
    for d in range(nlev):
        klo[d] = max(0, d - D + kA)
        khi[d] = min(d, kB)
        offsets[d + 1] = offsets[d] + khi[d] - klo[d] + 1
    total = offsets[nlev] if full else 0
    fv = np.empty((M, total))
    fz = np.empty((M, total), np.int64)
    fa = np.empty((M, total), np.int64)

    width = kB + 3
    prev = np.full((M, width), NEG_INF)
    cur = np.full((M, width), NEG_INF)
    prev_z = np.zeros((M, width), np.int64)
    cur_z = np.zeros((M, width), np.int64)
    prev_a = np.zeros((M, width), np.int64)
    cur_a = np.zeros((M, width), np.int64)
    wbuf = np.empty(width)
    ibuf = np.empty(width, np.int64)
    kbuf = np.empty(width)
    for d in range(nlev):
        lo = klo[d]
        hi = khi[d]
        blo = max(lo, 1)
        bhi = min(hi, d - 1)
        nb = bhi - blo + 1
        if nb > 0:
            fill_weights(key, d, blo, nb, wbuf, ibuf, kbuf)
        for m in range(M):
            pv = prev[m]
            pz = prev_z[m]
            pa = prev_a[m]
            cv = cur[m]
            cz = cur_z[m]
            ca = cur_a[m]
            for i in range(nb):
                k = blo + i
                west = pv[k]
                south = pv[k + 1]
                zw = pz[k]
                zs = pz[k + 1]
                # branch-free select: the argmax is a coin flip for the
                # predictor, and selects let LLVM vectorise the loop
                take = (south > west) | ((south == west) & (zs >= zw))
                cv[k + 1] = wbuf[i] + (south if take else west)
                cz[k + 1] = zs if take else zw
                ca[k + 1] = pa[k + 1] if take else pa[k]
            if lo == 0:
                cv[1] = by[m, d]
                cz[1] = -d
                ca[1] = aux_y[m, d]
            if hi == d and d > 0:
                cv[d + 1] = bx[m, d]
                cz[d + 1] = d
                ca[d + 1] = aux_x[m, d]
            cv[lo] = NEG_INF
            cv[hi + 2] = NEG_INF
            if full:
                o = offsets[d]
                for k in range(lo, hi + 1):
                    fv[m, o + k - lo] = cv[k + 1]
                    fz[m, o + k - lo] = cz[k + 1]
                    fa[m, o + k - lo] = ca[k + 1]
        prev, cur = cur, prev
        prev_z, cur_z = cur_z, prev_z
        prev_a, cur_a = cur_a, prev_a
    ntop = kB - kA + 1
    top_v = np.empty((M, ntop))
    top_z = np.empty((M, ntop), np.int64)
    top_a = np.empty((M, ntop), np.int64)
    for m in range(M):
        for i in range(ntop):
            top_v[m, i] = prev[m, kA + 1 + i]
            top_z[m, i] = prev_z[m, kA + 1 + i]
            top_a[m, i] = prev_a[m, kA + 1 + i]
    return top_v, top_z, top_a, fv, fz, fa, offsets, klo, khi


@njit(inline="always")
def _curve_piece(key, d, a, b, jlo, s, seed_ok, kbase, prev, prev_k, cur,
                 cur_k, wbuf, ibuf, kbuf):
    n = b - a + 1
    if n <= 0:
        return
    fill_weights(key, d, a, n, wbuf, ibuf, kbuf)
    for i in range(n):
        k = a + i
        jidx = 2 * k - d - jlo
        sj = s[jidx]
        idx = k - kbase
        if d <= sj:
            cur[idx] = NEG_INF
            cur_k[idx] = 0
        elif d == sj + 2 and seed_ok[jidx] == 1:
            cur[idx] = wbuf[i]
            cur_k[idx] = jidx + jlo
        else:
            west = prev[idx - 1]
            south = prev[idx]
            kw = prev_k[idx - 1]
            ks = prev_k[idx]
            take = (south > west) | ((south == west) & (ks >= kw))
            cur[idx] = wbuf[i] + (south if take else west)
            cur_k[idx] = ks if take else kw


@njit(**_opts)
def sweep_curve(key, D, kA, kB, jlo, s, seed_ok, d0, klo, khi, outside_only,
                full):
    J = s.size
    nlev = D - d0 + 1
    offsets = np.zeros(nlev + 1, np.int64)
    kmin = klo[0]
    kmax = khi[0]
    for li in range(nlev):
        c = khi[li] - klo[li] + 1
        if c < 0:
            c = 0
        offsets[li + 1] = offsets[li] + c
        kmin = min(kmin, klo[li])
        kmax = max(kmax, khi[li])
    total = offsets[nlev] if full else 0
    fv = np.empty(total)
    fk = np.empty(total, np.int64)

    kbase = kmin - 1
    width = kmax - kbase + 2
    prev = np.full(width, NEG_INF)
    cur = np.full(width, NEG_INF)
    prev_k = np.zeros(width, np.int64)
    cur_k = np.zeros(width, np.int64)
    wbuf = np.empty(width)
    ibuf = np.empty(width, np.int64)
    kbuf = np.empty(width)
    nx = max(kB, 0)
    ny = max(D - kA, 0)
    axis_x = np.zeros(nx + 1)
    axis_y = np.zeros(ny + 1)
    lab_x = np.zeros(nx + 1, np.int64)
    lab_y = np.zeros(ny + 1, np.int64)
    clipped = False
    for li in range(nlev):
        d = d0 + li
        lo = klo[li]
        hi = khi[li]
        # level ranges move by at most one site per level, so guards at both
        # ends keep entries from two levels back out of the parent reads
        if hi >= lo:
            cur[lo - 1 - kbase] = NEG_INF
            cur_k[lo - 1 - kbase] = 0
            cur[hi + 1 - kbase] = NEG_INF
            cur_k[hi + 1 - kbase] = 0
        else:
            for idx in range(width):
                cur[idx] = NEG_INF
                cur_k[idx] = 0
        if hi >= lo:
            if outside_only and d >= 2:
                for k in range(max(lo, 1), min(hi, d - 1) + 1):
                    cur[k - kbase] = NEG_INF
                    cur_k[k - kbase] = 0
                _curve_piece(key, d, lo, min(hi, 0), jlo, s, seed_ok, kbase,
                             prev, prev_k, cur, cur_k, wbuf, ibuf, kbuf)
                _curve_piece(key, d, max(lo, d), hi, jlo, s, seed_ok, kbase,
                             prev, prev_k, cur, cur_k, wbuf, ibuf, kbuf)
            else:
                _curve_piece(key, d, lo, hi, jlo, s, seed_ok, kbase,
                             prev, prev_k, cur, cur_k, wbuf, ibuf, kbuf)
            if 0 <= d <= nx and lo <= d <= hi and d > s[d - jlo]:
                axis_x[d] = cur[d - kbase]
                lab_x[d] = cur_k[d - kbase]
            if 0 <= d <= ny and lo <= 0 <= hi and d > s[-d - jlo]:
                axis_y[d] = cur[-kbase]
                lab_y[d] = cur_k[-kbase]
            computed_lo = (not outside_only) or lo <= 0 or lo >= d
            computed_hi = (not outside_only) or hi <= 0 or hi >= d
            if d - D + kA < lo and 2 * lo - d - jlo == 0 and d > s[0] \
                    and computed_lo:
                clipped = True
            if kB > hi and 2 * hi - d - jlo == J - 1 and d > s[J - 1] \
                    and computed_hi:
                clipped = True
            if full:
                o = offsets[li]
                for k in range(lo, hi + 1):
                    fv[o + k - lo] = cur[k - kbase]
                    fk[o + k - lo] = cur_k[k - kbase]
        prev, cur = cur, prev
        prev_k, cur_k = cur_k, prev_k
    ntop = kB - kA + 1
    top_v = np.empty(ntop)
    top_k = np.empty(ntop, np.int64)
    for i in range(ntop):
        top_v[i] = prev[kA + i - kbase]
        top_k[i] = prev_k[kA + i - kbase]
    return (top_v, top_k, axis_x, axis_y, lab_x, lab_y, fv, fk, offsets,
            clipped)
