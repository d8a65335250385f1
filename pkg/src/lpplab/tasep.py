"""TASEP height functions, from LPP occupation times and by direct simulation.

Columns are indexed by j = k - l and heights by k + l. A curve profile gives
the initial height s_j; a site above the curve is occupied once its passage
time is at most t, so h(j, t) = s_j + 2 (number of occupied sites above s_j
in column j).
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .environment import Environment, Stream
from .lpp import PassageField
from .profiles import CurveProfile, ParticleConfig, profile_from_particles


@dataclass(frozen=True)
class HeightFunction:
    values: np.ndarray
    jlo: int
    t: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.int64)
        object.__setattr__(self, "values", v)
        if v.size > 1 and not np.all(np.abs(np.diff(v)) == 1):
            raise ValueError("height differences must be +-1")

    @property
    def jhi(self) -> int:
        return self.jlo + self.values.size - 1

    def __call__(self, j):
        j = np.asarray(j)
        if np.any(j < self.jlo) or np.any(j > self.jhi):
            raise IndexError(f"columns outside [{self.jlo}, {self.jhi}]")
        return self.values[j - self.jlo]

    def occupancy(self) -> np.ndarray:
        """eta(j) for j in (jlo, jhi]: a particle where the height drops."""
        return ((1 - np.diff(self.values)) // 2).astype(np.int8)


class GrowthCluster(NamedTuple):
    """Gamma_t seen through its boundary: (k, l) is occupied iff h(k-l) >= k+l."""

    boundary: HeightFunction

    def contains(self, k, l):
        return self.boundary(np.asarray(k) - np.asarray(l)) >= \
            np.asarray(k) + np.asarray(l)


def initial_height(profile: CurveProfile) -> HeightFunction:
    return HeightFunction(profile.heights.copy(), profile.jlo, 0.0)


# ---------------------------------------------------------------- from LPP

def _site_table(field: PassageField):
    if field.mode != "curve" or field.storage != "full":
        raise ValueError("need a full-storage curve-mode field")
    k, l, L, _ = field.sites()
    L = np.where(np.isneginf(L), np.inf, L)  # unreachable sites never fill
    return k, l, L


def _column_range(field: PassageField):
    D, kA, kB = field.target
    return 2 * kA - D, 2 * kB - D


def height_from_occupation(field: PassageField, t: float,
                           columns=None) -> HeightFunction:
    """h(j, t) from occupation times on columns that the field covers fully.

    Default columns are those under the target segment, which the light cone
    covers from the curve up to the top level.
    """
    lo, hi = _column_range(field) if columns is None else columns
    prof = field.profile
    if lo < prof.jlo or hi > prof.jhi:
        raise ValueError("columns outside the curve window")
    if lo > hi:
        raise ValueError("empty column range")
    k, l, L = _site_table(field)
    j = k - l
    d = k + l
    s = prof.heights
    m = (j >= lo) & (j <= hi)
    j, d, L = j[m], d[m], L[m]
    above = d > s[j - prof.jlo]
    occ = above & (L <= t)
    width = hi - lo + 1
    filled = np.bincount(j[occ] - lo, minlength=width)
    top = np.full(width, -1, dtype=np.int64)
    np.maximum.at(top, j - lo, d)
    cols = np.arange(lo, hi + 1)
    base = s[cols - prof.jlo]
    bottom = np.full(width, np.iinfo(np.int64).max)
    np.minimum.at(bottom, j[above] - lo, d[above])
    if np.any(top < base + 2) or np.any(
            (filled > 0) & (bottom > base + 2)):
        raise ValueError("field does not cover these columns above the curve")
    top_site = np.zeros(width, dtype=bool)
    np.logical_or.at(top_site, j[occ & (d == top[j - lo])] - lo, True)
    if top_site.any():
        raise ValueError(
            f"window too small: the cluster at t={t} reaches the top of "
            f"the computed domain in {int(top_site.sum())} columns")
    h = base + 2 * filled
    return HeightFunction(h, lo, float(t))


def talpp_violations(field: PassageField, t: float, columns=None) -> int:
    """Sites where L(k,l) <= t and h(k-l, t) >= k+l disagree."""
    hf = height_from_occupation(field, t, columns)
    k, l, L = _site_table(field)
    j = k - l
    m = (j >= hf.jlo) & (j <= hf.jhi)
    lhs = L[m] <= t
    rhs = hf(j[m]) >= (k + l)[m]
    return int(np.sum(lhs != rhs))


def evolution_violations(field: PassageField, t_max: float) -> int:
    """Checks that each occupation is a local-minimum flip.

    At the time L(x) of site x = (k, l), column j = k - l moves from d-2 to
    d: both neighbours must stand at d-1, i.e. (k-1, l) and (k, l-1) are
    already occupied and (k, l+1), (k+1, l) are not. Distinct sites must
    also fill at distinct times, so one flip happens per event. Columns
    next to the window edges are skipped.
    """
    k, l, L = _site_table(field)
    d = k + l
    s = field.profile.heights
    jj = k - l
    # neighbours in the frozen edge columns never fill, so stay two off
    inside = (jj >= field.profile.jlo + 2) & (jj <= field.profile.jhi - 2)
    above = np.zeros(k.size, dtype=bool)
    above[inside] = d[inside] > s[jj[inside] - field.profile.jlo]
    lookup = {(int(a), int(b)): v for a, b, v in zip(k, l, L)}
    bad = 0
    times = []
    for a, b, v, up in zip(k, l, L, above):
        if not up or v > t_max:
            continue
        nb = [(a - 1, b), (a, b - 1), (a, b + 1), (a + 1, b)]
        if not all(p in lookup for p in nb):
            continue
        w, sth, nth, est = (lookup[p] for p in nb)
        if math.isinf(w) or math.isinf(sth):
            continue  # a parent cut off by the window edge
        if not (w < v and sth < v and nth > v and est > v):
            bad += 1
        times.append(v)
    times = np.sort(np.asarray(times))
    bad += int(np.sum(np.diff(times) == 0))
    return bad


# ---------------------------------------------------------------- direct

@dataclass
class TasepTrajectory:
    snapshots: dict
    jump_times: list
    events: list = field(repr=False)
    padding: int = 0

    def N(self, t: float) -> int:
        """Jumps from site 0 to site 1 during [0, t]."""
        return int(np.searchsorted(self.jump_times, t, side="right"))


class _Clocks:
    """Exp(1) draws from the TASEP clock stream, one lattice key per draw."""

    def __init__(self, env: Environment, block: int = 4096):
        self.env = env
        self.block = block
        self.buf = np.zeros(0)
        self.pos = 0
        self.count = 0

    def __call__(self) -> float:
        if self.pos == self.buf.size:
            idx = np.arange(self.count, self.count + self.block)
            self.buf = self.env.exp1(idx, np.zeros_like(idx), Stream.TASEP_CLOCKS)
            self.count += self.block
            self.pos = 0
        v = self.buf[self.pos]
        self.pos += 1
        return float(v)


def direct_tasep(cfg, t_max: float, seed: int, snapshot_times=None,
                 observe: int | None = None, record_events: bool = False,
                 check: bool = False) -> TasepTrajectory:
    """Continuous-time TASEP in height-function form.

    Every local minimum carries a rate-1 clock; a local minimum stays one
    until it flips, so clocks are never invalidated. Edge columns are frozen,
    which is the same as frozen particles on the left and frozen holes on
    the right. ``observe`` is the half-width whose heights are trusted; the
    window must exceed it by 2 t_max on both sides.
    """
    prof = cfg if isinstance(cfg, CurveProfile) else profile_from_particles(cfg)
    h = prof.heights.copy()
    jlo = prof.jlo
    pad = int(math.ceil(2 * t_max))
    if observe is not None and (-jlo < observe + pad or prof.jhi < observe + pad):
        raise ValueError(
            f"window [{jlo}, {prof.jhi}] leaves less than 2 t_max = {pad} "
            f"sites of padding around |j| <= {observe}")
    snaps = sorted(set(float(x) for x in (snapshot_times or [t_max])))
    if snaps and snaps[-1] > t_max:
        raise ValueError("snapshot after t_max")
    clock = _Clocks(Environment(seed))
    m = h.size
    heap = []

    def is_min(i):
        return 0 < i < m - 1 and h[i - 1] == h[i] + 1 and h[i + 1] == h[i] + 1

    for i in range(1, m - 1):
        if is_min(i):
            heap.append((clock(), i))
    heapq.heapify(heap)
    out, jumps, events = {}, [], []
    si = 0
    while heap:
        tau, i = heapq.heappop(heap)
        while si < len(snaps) and snaps[si] < tau:
            out[snaps[si]] = HeightFunction(h.copy(), jlo, snaps[si])
            si += 1
        if tau > t_max:
            break
        h[i] += 2
        j = i + jlo
        if j == 0:
            jumps.append(tau)
        if record_events:
            events.append((tau, j, int(h[i])))
        if check and not (abs(h[i] - h[i - 1]) == 1 and abs(h[i + 1] - h[i]) == 1):
            raise AssertionError("exclusion rule broken")
        for nb in (i - 1, i + 1):
            if is_min(nb):
                heapq.heappush(heap, (tau + clock(), nb))
    while si < len(snaps):
        out[snaps[si]] = HeightFunction(h.copy(), jlo, snaps[si])
        si += 1
    return TasepTrajectory(out, jumps, events, pad)


# ---------------------------------------------------------------- invariance

def invariance_check(rho: float, t_ladder, seeds, window: int | None = None,
                     distance: int = 3, sigmas: float = 3.0) -> dict:
    """Occupation at site 0 and the pair (0, distance) along the t-ladder.

    Starts from product Bernoulli(rho); each seed draws its configuration
    from its particle stream and its clocks from the clock stream.
    """
    if not 0.0 < rho < 1.0:
        raise ValueError("rho must lie in (0, 1)")
    t_ladder = sorted(float(t) for t in t_ladder)
    t_max = t_ladder[-1]
    w = window or int(math.ceil(2 * t_max)) + distance + 8
    seeds = list(seeds)
    occ0 = np.zeros((len(t_ladder), len(seeds)))
    pair = np.zeros_like(occ0)
    for c, s in enumerate(seeds):
        cfg = ParticleConfig.bernoulli(w, rho, int(s))
        times = [t for t in t_ladder if t > 0]
        traj = direct_tasep(cfg, t_max, int(s), times or None) if t_max > 0 else None
        for r, t in enumerate(t_ladder):
            hf = initial_height(profile_from_particles(cfg)) if t == 0 \
                else traj.snapshots[t]
            eta = hf.occupancy()  # eta[j - jlo - 1] is site j
            base = -hf.jlo - 1
            occ0[r, c] = eta[base]
            pair[r, c] = eta[base] * eta[base + distance]
    rows = []
    n = len(seeds)
    for r, t in enumerate(t_ladder):
        f, p = occ0[r].mean(), pair[r].mean()
        se_f = math.sqrt(rho * (1 - rho) / n)
        se_p = math.sqrt(rho ** 2 * (1 - rho ** 2) / n)
        rows.append(dict(t=t, occupation=float(f), occupation_se=se_f,
                         occupation_ok=abs(f - rho) <= sigmas * se_f,
                         pair=float(p), pair_target=rho ** 2, pair_se=se_p,
                         pair_ok=abs(p - rho ** 2) <= sigmas * se_p))
    return dict(rho=rho, seeds=n, window=w, distance=distance, rows=rows,
                ok=all(r["occupation_ok"] and r["pair_ok"] for r in rows))
