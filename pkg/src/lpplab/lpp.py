"""Last-passage times by anti-diagonal wavefront sweeps.

Sites are swept level by level, ``d = k + l``. A target segment on the top
level fixes the light cone: at level ``d`` only ``k`` in
``[d - D + k_first, k_last]`` can reach a target, so nothing else is computed.
Several boundary models that share the bulk environment are swept together.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from . import kernels
from ._kernels_numpy import corner_mask
from .environment import Environment, LatticePoint, Stream, lattice_floor
from .profiles import BoundaryProfile, CornerSet, CurveProfile

BRUTEFORCE_MAX_SIDE = 8


class Segment(NamedTuple):
    """Sites ``(k, level - k)`` for ``k`` in ``[k_first, k_last]``."""

    level: int
    k_first: int
    k_last: int

    @classmethod
    def antidiagonal(cls, T: int, i_lo: int, i_hi: int):
        """The points [i]_T = (T + i, T - i) for i in [i_lo, i_hi]."""
        if i_lo > i_hi:
            raise ValueError("empty target range")
        return cls(2 * T, T + i_lo, T + i_hi)

    @classmethod
    def point(cls, k: int, l: int):
        return cls(k + l, k, k)

    @property
    def size(self) -> int:
        return self.k_last - self.k_first + 1


def antidiag(x: float, t: float) -> LatticePoint:
    """[x]_t = (floor t + floor x, floor t - floor x)."""
    if abs(x) > t:
        raise ValueError(f"|x| = {abs(x)} exceeds t = {t}")
    T, X = int(np.floor(t)), int(np.floor(x))
    p = LatticePoint(T + X, T - X)
    if p.k < 0 or p.l < 0:
        raise ValueError(f"[{x}]_{t} = {tuple(p)} leaves the quadrant")
    return p


def antidiagonal_segment(n: int, t: float, i_lo: int, i_hi: int) -> Segment:
    T = lattice_floor(t * n)
    if i_lo < -T or i_hi > T:
        raise ValueError(f"indices [{i_lo}, {i_hi}] leave the quadrant at T={T}")
    return Segment.antidiagonal(T, i_lo, i_hi)


@dataclass
class PassageField:
    """Passage times on the light cone of a target segment.

    ``top_labels`` are exit points Z (boundary mode) or maximizing corner
    indices K (curve mode). ``top_aux`` carries a second label through the
    same argmax choices: for a boundary derived from a curve it is the corner
    index K, otherwise it equals the exit label.
    """

    mode: str
    target: Segment
    top_values: np.ndarray
    top_labels: np.ndarray
    top_aux: np.ndarray
    storage: str = "frontier"
    level_first: int = 0
    klo: np.ndarray | None = None
    khi: np.ndarray | None = None
    offsets: np.ndarray | None = None
    values: np.ndarray | None = field(default=None, repr=False)
    labels: np.ndarray | None = field(default=None, repr=False)
    aux: np.ndarray | None = field(default=None, repr=False)
    axis_x: np.ndarray | None = field(default=None, repr=False)
    axis_y: np.ndarray | None = field(default=None, repr=False)
    axis_labels_x: np.ndarray | None = field(default=None, repr=False)
    axis_labels_y: np.ndarray | None = field(default=None, repr=False)
    window_clipped: bool = False
    profile: object = None
    seed: int | None = None
    corner_seeds: np.ndarray | None = field(default=None, repr=False)

    @property
    def T(self) -> int:
        if self.target.level % 2:
            raise ValueError("top level is odd; no anti-diagonal [i]_T")
        return self.target.level // 2

    @property
    def i_range(self):
        T = self.T
        return self.target.k_first - T, self.target.k_last - T

    def _top_pos(self, i):
        pos = np.asarray(i) + self.T - self.target.k_first
        if np.any(pos < 0) or np.any(pos >= self.target.size):
            raise ValueError(f"anti-diagonal index outside {self.i_range}")
        return pos

    def at(self, i):
        """L[i]_T for anti-diagonal indices i."""
        return self.top_values[self._top_pos(i)]

    def label_at(self, i):
        return self.top_labels[self._top_pos(i)]

    def aux_at(self, i):
        return self.top_aux[self._top_pos(i)]

    # full-storage lookups -------------------------------------------------
    def _flat_index(self, k: int, l: int) -> int:
        if self.storage != "full":
            raise ValueError("site lookup needs a full-storage field")
        li = k + l - self.level_first
        if li < 0 or li >= self.klo.size:
            return -1
        if not self.klo[li] <= k <= self.khi[li]:
            return -1
        return int(self.offsets[li] + k - self.klo[li])

    def covers(self, k: int, l: int) -> bool:
        return self._flat_index(k, l) >= 0

    def value(self, k: int, l: int) -> float:
        idx = self._flat_index(k, l)
        if idx < 0:
            raise KeyError(f"site {(k, l)} outside the computed domain")
        return float(self.values[idx])

    def label(self, k: int, l: int) -> int:
        idx = self._flat_index(k, l)
        if idx < 0:
            raise KeyError(f"site {(k, l)} outside the computed domain")
        return int(self.labels[idx])

    def sites(self):
        """Arrays (k, l, L, label) over the stored domain."""
        if self.storage != "full":
            k = np.arange(self.target.k_first, self.target.k_last + 1)
            return k, self.target.level - k, self.top_values, self.top_labels
        ks, ls = [], []
        for li in range(self.klo.size):
            kk = np.arange(self.klo[li], self.khi[li] + 1)
            ks.append(kk)
            ls.append(self.level_first + li - kk)
        k = np.concatenate(ks) if ks else np.zeros(0, np.int64)
        l = np.concatenate(ls) if ls else np.zeros(0, np.int64)
        return k, l, self.values, self.labels


def _check_storage(storage):
    if storage not in ("frontier", "full"):
        raise ValueError("storage must be 'frontier' or 'full'")
    return storage == "full"


def boundary_fields(env: Environment, profiles, target: Segment,
                    storage: str = "frontier", backend=None):
    """One fused sweep for several boundary models on a shared bulk."""
    full = _check_storage(storage)
    D, kA, kB = target
    if kA < 0 or kB > D or kA > kB:
        raise ValueError(f"target segment {tuple(target)} outside the quadrant")
    nx, ny = kB, D - kA
    cum = [p.cumulative(env, nx, ny) for p in profiles]
    labs = [p.exit_labels(nx, ny) for p in profiles]
    bx = np.stack([c[0] for c in cum])
    by = np.stack([c[1] for c in cum])
    ax = np.stack([lb[0] for lb in labs])
    ay = np.stack([lb[1] for lb in labs])
    res = kernels.sweep_quadrant(env.key(Stream.BULK), D, kA, kB, bx, by, ax,
                                 ay, full, backend=backend)
    top_v, top_z, top_a, fv, fz, fa, offsets, klo, khi = res
    out = []
    for m, prof in enumerate(profiles):
        out.append(PassageField(
            mode="boundary", target=target, top_values=top_v[m],
            top_labels=top_z[m], top_aux=top_a[m], storage=storage,
            level_first=0, klo=klo, khi=khi, offsets=offsets,
            values=fv[m] if full else None, labels=fz[m] if full else None,
            aux=fa[m] if full else None, axis_x=bx[m], axis_y=by[m],
            profile=prof, seed=env.seed))
    return out


def lpp_from_boundary(env: Environment, b: BoundaryProfile, n: int, t: float,
                      targets, storage: str = "frontier", backend=None):
    """L^b and exit points Z^b on [i]_{tn} for i in ``targets``."""
    if isinstance(targets, Segment):
        seg = targets
    else:
        i_lo, i_hi = targets
        seg = antidiagonal_segment(n, t, i_lo, i_hi)
    return boundary_fields(env, [b], seg, storage, backend)[0]


def box_boundary_field(env, b, K: int, L: int, backend=None):
    """Full field on the rectangle [0,K] x [0,L]."""
    return boundary_fields(env, [b], Segment.point(K, L), "full", backend)[0]


def curve_field(env: Environment, curve: CurveProfile, target: Segment,
                corners: CornerSet | None = None, storage: str = "frontier",
                outside_only: bool = False, backend=None,
                require_reach: bool = True) -> PassageField:
    """Point-to-curve times L^h, seeded at the concave corners of ``curve``.

    ``outside_only`` skips the open quadrant k, l >= 1; it is used to read
    L^h on the two axes when the quadrant is handled by a boundary sweep.
    """
    full = _check_storage(storage)
    D, kA, kB = target
    s = curve.heights
    jlo, jhi = curve.jlo, curve.jhi
    if 2 * kA - D < jlo or 2 * kB - D > jhi:
        raise ValueError("curve window does not cover the target segment")
    allowed = np.ones(s.size, np.uint8) if corners is None \
        else corners.mask(curve)
    res = kernels.sweep_curve(env.key(Stream.BULK), D, kA, kB, jlo, s,
                              allowed, outside_only, full, backend=backend)
    (top_v, top_k, ax, ay, lx, ly, fv, fk, offsets, klo, khi, d0,
     clipped) = res
    ax = ax.astype(np.float64)
    ay = ay.astype(np.float64)
    ax[np.arange(ax.size) > jhi] = np.nan
    ay[np.arange(ay.size) > -jlo] = np.nan

    j_top = 2 * np.arange(kA, kB + 1) - D
    below_top = D <= s[j_top - jlo]
    if require_reach and not outside_only and np.any(
            ~below_top & ~np.isfinite(top_v)):
        raise ValueError("some targets dominate no corner of the curve")
    top_v = np.where(below_top, 0.0, top_v)
    if full:
        fv = fv.copy()
        if not outside_only:
            _zero_initial_sites(fv, klo, khi, offsets, d0, s, jlo)
    return PassageField(
        mode="curve", target=target, top_values=top_v, top_labels=top_k,
        top_aux=top_k.copy(), storage=storage, level_first=d0, klo=klo,
        khi=khi, offsets=offsets, values=fv if full else None,
        labels=fk if full else None, aux=fk if full else None, axis_x=ax,
        axis_y=ay, axis_labels_x=lx, axis_labels_y=ly,
        window_clipped=bool(clipped), profile=curve, seed=env.seed,
        corner_seeds=corner_mask(s) & allowed)


def _zero_initial_sites(fv, klo, khi, offsets, d0, s, jlo):
    # sites of the initial cluster carry passage time 0 by convention; sites
    # above the curve that no corner reaches stay -inf
    for li in range(klo.size):
        if khi[li] < klo[li]:
            continue
        d = d0 + li
        kk = np.arange(klo[li], khi[li] + 1)
        sl = slice(offsets[li], offsets[li] + kk.size)
        below = d <= s[2 * kk - d - jlo]
        seg = fv[sl]
        seg[below] = 0.0
        fv[sl] = seg


def lpp_from_curve(env: Environment, profile: CurveProfile, targets,
                   corners: CornerSet | None = None,
                   storage: str = "frontier", backend=None) -> PassageField:
    """L^h with corner labels K; ``targets`` is a Segment or (T, i_lo, i_hi)."""
    seg = targets if isinstance(targets, Segment) \
        else Segment.antidiagonal(*targets)
    return curve_field(env, profile, seg, corners, storage, backend=backend)


def _point_source_curve(start):
    k0, l0 = int(start[0]), int(start[1])
    j0 = k0 - l0
    return (k0 + l0 - 2), j0


def point_to_point_field(env: Environment, start, end, storage="full",
                         backend=None) -> PassageField:
    """Field of L(start, y) on the rectangle between ``start`` and ``end``."""
    k0, l0 = int(start[0]), int(start[1])
    k1, l1 = int(end[0]), int(end[1])
    if k1 < k0 or l1 < l0:
        raise ValueError("need start <= end coordinatewise")
    span = (k1 - k0) + (l1 - l0) + 2
    base, j0 = _point_source_curve(start)
    j = np.arange(j0 - span, j0 + span + 1)
    s = base + np.abs(j - j0)
    full = _check_storage(storage)
    target = Segment.point(k1, l1)
    D, kA, kB = target
    allowed = np.ones(s.size, np.uint8)
    res = kernels.sweep_curve(env.key(Stream.BULK), D, kA, kB, int(j[0]), s,
                              allowed, False, full, backend=backend)
    (top_v, top_k, _, _, _, _, fv, fk, offsets, klo, khi, d0, _) = res
    return PassageField(
        mode="point", target=target, top_values=top_v, top_labels=top_k,
        top_aux=top_k.copy(), storage=storage, level_first=d0, klo=klo,
        khi=khi, offsets=offsets, values=fv if full else None,
        labels=fk if full else None, aux=fk if full else None,
        profile=("point", (k0, l0)), seed=env.seed,
        corner_seeds=corner_mask(s))


def lpp_point_to_point(env: Environment, start, end, backend=None) -> float:
    """Max over up-right paths start -> end of the summed weights, both ends in."""
    f = point_to_point_field(env, start, end, "frontier", backend)
    return float(f.top_values[0])


# ---------------------------------------------------------------- exits

class ExitRecord(NamedTuple):
    i: int
    target: LatticePoint
    label: int
    kind: str  # "z" exit coordinate or "k" corner index


def exit_points(field: PassageField, n: int, i_range=None) -> list:
    if field.mode != "boundary":
        raise ValueError("exit points are defined for boundary-mode fields")
    if field.target.level != 2 * n:
        raise ValueError(f"field is not on the anti-diagonal of level 2n={2 * n}")
    lo, hi = field.i_range if i_range is None else i_range
    out = []
    for i in range(lo, hi + 1):
        out.append(ExitRecord(i, LatticePoint(n + i, n - i),
                              int(field.label_at(i)), "z"))
    return out


def corner_indices(field: PassageField, i_range=None) -> list:
    """Maximizing corner index K at each anti-diagonal target."""
    if field.mode == "boundary":
        if field.profile is None or field.profile.kind != "derived_from_curve":
            raise ValueError("corner indices need a curve or derived field")
        lab = field.aux_at
    elif field.mode == "curve":
        lab = field.label_at
    else:
        raise ValueError("corner indices need a curve or derived field")
    lo, hi = field.i_range if i_range is None else i_range
    T = field.T
    return [ExitRecord(i, LatticePoint(T + i, T - i), int(lab(i)), "k")
            for i in range(lo, hi + 1)]


def antidiagonal_increments(field: PassageField, n: int) -> np.ndarray:
    """zeta_k = L[k]_n - L[k-1]_n for k = -n+1 .. n."""
    if field.target.level != 2 * n:
        raise ValueError(f"field is not on the anti-diagonal of level {2 * n}")
    lo, hi = field.i_range
    if lo > -n or hi < n:
        raise ValueError("field does not cover the full anti-diagonal [-n, n]")
    vals = field.at(np.arange(-n, n + 1))
    return np.diff(vals)


# ---------------------------------------------------------------- geodesics

class Geodesic(NamedTuple):
    points: list
    weight_sum: float


def _pick_south(vw, vs, lw, ls):
    return vs > vw or (vs == vw and ls >= lw)


def geodesic_backtrack(field: PassageField, env: Environment, target) -> Geodesic:
    """Rightmost geodesic certifying the field value at ``target``."""
    if field.storage != "full":
        raise ValueError("geodesic backtracking needs a full-storage field")
    k, l = int(target[0]), int(target[1])
    if not field.covers(k, l):
        raise ValueError(f"target {(k, l)} outside the field")
    neg = -np.inf
    curve = field.profile if field.mode == "curve" else None
    if field.mode == "point":
        _, (k0, l0) = field.profile
        base, j0 = _point_source_curve((k0, l0))
        height = lambda j: base + abs(j - j0)  # noqa: E731
        is_seed = lambda kk, ll: (kk, ll) == (k0, l0)  # noqa: E731
    elif curve is not None:
        seeds = field.corner_seeds
        height = lambda j: int(curve.heights[j - curve.jlo])  # noqa: E731

        def is_seed(kk, ll):
            j = kk - ll
            return (curve.jlo <= j <= curve.jhi and kk + ll == height(j) + 2
                    and seeds[j - curve.jlo] == 1)
    else:
        height = None
        is_seed = None

    def raw(kk, ll):
        if not field.covers(kk, ll):
            return neg, 0
        if height is not None and kk + ll <= height(kk - ll):
            return neg, 0
        return field.value(kk, ll), field.label(kk, ll)

    if height is not None and raw(k, l)[0] == neg:
        raise ValueError(f"target {(k, l)} is reached by no corner")
    path = [(k, l)]
    while True:
        if field.mode == "boundary" and (k == 0 or l == 0):
            break
        if field.mode != "boundary" and is_seed(k, l):
            break
        vw, lw = raw(k - 1, l)
        vs, ls = raw(k, l - 1)
        if vw == neg and vs == neg:
            raise RuntimeError(f"backtrack stuck at {(k, l)}")
        if _pick_south(vw, vs, lw, ls):
            l -= 1
        else:
            k -= 1
        path.append((k, l))
    path.reverse()
    if field.mode == "boundary":
        z = path[0][0] if path[0][1] == 0 else -path[0][1]
        axis = [(x, 0) for x in range(0, z)] if z > 0 else \
            [(0, y) for y in range(0, -z)]
        if z == 0:
            axis = []
        bulk = path[1:]
        bx, by = field.axis_x, field.axis_y
        total = float(bx[z] if z >= 0 else by[-z])
        pts = axis + path
    else:
        bulk = path
        total = 0.0
        pts = path
    if bulk:
        kk = np.array([p[0] for p in bulk])
        ll = np.array([p[1] for p in bulk])
        w = np.atleast_1d(env.exp1(kk, ll, Stream.BULK))
        # same summation order as the sweep, so the certificate is exact
        if field.mode != "boundary":
            total, w = float(w[0]), w[1:]
        for x in w:
            total = total + float(x)
    return Geodesic([LatticePoint(*p) for p in pts], total)


# ---------------------------------------------------------------- oracle

@lru_cache(maxsize=256)
def _all_paths(a: int, b: int):
    """Relative site offsets of every up-right path with a right and b up steps."""
    n = a + b
    paths = []
    for rights in itertools.combinations(range(n), a):
        rset = set(rights)
        k = l = 0
        pts = [(0, 0)]
        for step in range(n):
            if step in rset:
                k += 1
            else:
                l += 1
            pts.append((k, l))
        paths.append(pts)
    arr = np.array(paths, dtype=np.int64).reshape(len(paths), n + 1, 2)
    return arr[:, :, 0], arr[:, :, 1]


def _best_path_sum(grid, origin, start, end):
    """Max over paths start->end (inclusive) with weights grid[k-ok, l-ol]."""
    a, b = end[0] - start[0], end[1] - start[1]
    dk, dl = _all_paths(a, b)
    ok, ol = origin
    sums = grid[dk + start[0] - ok, dl + start[1] - ol].sum(axis=1)
    return float(sums.max())


class BruteResult(NamedTuple):
    value: float
    label: int


def lpp_bruteforce(env: Environment, mode: str, size: int, *, start=(1, 1),
                   target=None, boundary: BoundaryProfile | None = None,
                   profile: CurveProfile | None = None) -> BruteResult:
    """Exhaustive enumeration of up-right paths; an oracle for the sweeps.

    ``point``: paths from ``start`` to ``start + (size-1, size-1)`` or to
    ``target``. ``boundary``: paths leaving the axes at every admissible entry
    z, towards ``target`` (default ``(size, size)``); each path is counted
    once, at the last axis site it visits. ``curve``: paths from every
    concave corner below ``target``.
    """
    if size < 1 or size > BRUTEFORCE_MAX_SIDE:
        raise ValueError(f"box side must be in [1, {BRUTEFORCE_MAX_SIDE}]")
    if mode == "point":
        end = target if target is not None else \
            (start[0] + size - 1, start[1] + size - 1)
        if max(end[0] - start[0], end[1] - start[1]) + 1 > size:
            raise ValueError("target outside the declared box")
        grid = env.weights_box(start[0], end[0], start[1], end[1])
        return BruteResult(_best_path_sum(grid, start, start, end), 0)
    if mode == "boundary":
        if boundary is None:
            raise ValueError("boundary mode needs a BoundaryProfile")
        k, l = target if target is not None else (size, size)
        if k > size or l > size or k < 0 or l < 0:
            raise ValueError("target outside the declared box")
        bx, by = boundary.cumulative(env, k, l)
        if k == 0 or l == 0:
            z = k if l == 0 else -l
            return BruteResult(float(bx[k] if l == 0 else by[l]), z)
        grid = env.weights_box(1, k, 1, l)
        best, arg = -np.inf, None
        for z in range(1, k + 1):
            v = float(bx[z]) + _best_path_sum(grid, (1, 1), (z, 1), (k, l))
            if v > best or (v == best and z > arg):
                best, arg = v, z
        for z in range(1, l + 1):
            v = float(by[z]) + _best_path_sum(grid, (1, 1), (1, z), (k, l))
            if v > best or (v == best and -z > arg):
                best, arg = v, -z
        return BruteResult(best, arg)
    if mode == "curve":
        if profile is None or target is None:
            raise ValueError("curve mode needs a profile and a target")
        from .profiles import corners as _corners
        k, l = target
        cs = _corners(profile)
        cand = [(int(j), p) for j, p in zip(cs.indices, cs.points)
                if p.k <= k and p.l <= l]
        if not cand:
            raise ValueError("target dominates no corner")
        kmin = min(p.k for _, p in cand)
        lmin = min(p.l for _, p in cand)
        if max(k - kmin, l - lmin) + 1 > size:
            raise ValueError("corners and target exceed the declared box")
        grid = env.weights_box(kmin, k, lmin, l)
        best, arg = -np.inf, None
        for j, p in cand:
            v = _best_path_sum(grid, (kmin, lmin), (p.k, p.l), (k, l))
            if v > best or (v == best and j > arg):
                best, arg = v, j
        return BruteResult(best, arg)
    raise ValueError(f"unknown mode {mode!r}")
