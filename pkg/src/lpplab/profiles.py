"""Initial data: particle configurations, down-right curves and boundary weights.

A curve is stored by its rotated heights ``s[j] = k + l`` of the point
``h(j) = (k, l)`` with ``k - l = j``; ``s`` is also the initial TASEP height.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .environment import (Environment, LatticePoint, Stream, TiltParameters,
                          lattice_floor)


@dataclass(frozen=True)
class ParticleConfig:
    """Occupation numbers on sites ``first_site .. first_site+len-1``."""

    occupancy: np.ndarray
    first_site: int
    label: str = "custom"

    def __post_init__(self):
        occ = np.asarray(self.occupancy, dtype=np.int8)
        if occ.ndim != 1 or occ.size == 0:
            raise ValueError("particle window must be a nonempty 1-d array")
        if not np.isin(occ, (0, 1)).all():
            raise ValueError("occupancy values must be 0 or 1")
        object.__setattr__(self, "occupancy", occ)

    @property
    def last_site(self) -> int:
        return self.first_site + self.occupancy.size - 1

    def eta(self, j):
        return self.occupancy[np.asarray(j) - self.first_site]

    @property
    def density_left(self) -> float:
        left = self.occupancy[: max(0, 1 - self.first_site)]
        return float(left.mean()) if left.size else float("nan")

    @property
    def density_right(self) -> float:
        right = self.occupancy[max(0, 1 - self.first_site):]
        return float(1 - right.mean()) if right.size else float("nan")

    def require_densities(self):
        """Positive particle density on the left and hole density on the right."""
        if not (self.density_left > 0 and self.density_right > 0):
            raise ValueError("configuration needs particles among negative "
                             "sites and holes among positive sites")

    @classmethod
    def _sites(cls, window):
        return np.arange(-window + 1, window + 1)

    @classmethod
    def step(cls, window: int):
        j = cls._sites(window)
        return cls((j <= 0).astype(np.int8), -window + 1, "step")

    @classmethod
    def flat(cls, window: int):
        j = cls._sites(window)
        return cls((j % 2 == 0).astype(np.int8), -window + 1, "flat")

    @classmethod
    def bernoulli(cls, window: int, rho: float, seed: int):
        if not 0.0 < rho < 1.0:
            raise ValueError("rho must lie in (0, 1)")
        j = cls._sites(window)
        u = Environment(seed).uniform(j, np.zeros_like(j), Stream.PARTICLES)
        return cls((u < rho).astype(np.int8), -window + 1, f"bernoulli({rho})")

    @classmethod
    def from_string(cls, bits: str, first_site: int):
        occ = np.array([int(c) for c in bits.strip()], dtype=np.int8)
        return cls(occ, first_site, "explicit")

    @classmethod
    def mixed(cls, left: "ParticleConfig", right: "ParticleConfig"):
        """Sites <= 0 from ``left``, sites >= 1 from ``right``."""
        lo = max(left.first_site, right.first_site)
        hi = min(left.last_site, right.last_site)
        j = np.arange(lo, hi + 1)
        occ = np.where(j <= 0, left.eta(j), right.eta(j))
        return cls(occ, lo, f"mixed({left.label},{right.label})")


@dataclass(frozen=True)
class CurveProfile:
    """Down-right path on the index window ``[jlo, jlo+len(s)-1]``."""

    heights: np.ndarray
    jlo: int
    label: str = "custom"

    def __post_init__(self):
        s = np.asarray(self.heights, dtype=np.int64)
        object.__setattr__(self, "heights", s)
        if not self.jlo <= 0 <= self.jhi:
            raise ValueError("curve window must contain index 0")
        if s[-self.jlo] != 0:
            raise ValueError("curve must pass through the anchor (0,0)")
        if s.size > 1 and not np.all(np.abs(np.diff(s)) == 1):
            raise ValueError("steps must be (0,-1) or (1,0)")

    @property
    def jhi(self) -> int:
        return self.jlo + self.heights.size - 1

    @property
    def window(self) -> int:
        return min(-self.jlo, self.jhi)

    def height(self, j):
        return self.heights[np.asarray(j) - self.jlo]

    def point(self, j: int) -> LatticePoint:
        s = int(self.height(j))
        return LatticePoint((s + j) // 2, (s - j) // 2)

    def steps(self):
        """Moves h(j+1) - h(j) as an (m, 2) array."""
        s = self.heights
        up = np.diff(s) > 0
        return np.where(up[:, None], [1, 0], [0, -1])

    def spec(self) -> dict:
        return {"kind": self.label, "window": [self.jlo, self.jhi]}

    # ready-made profiles on [-W, W]
    @classmethod
    def narrow_wedge(cls, window: int):
        j = np.arange(-window, window + 1)
        return cls(np.abs(j), -window, "narrow_wedge")

    @classmethod
    def flat(cls, window: int):
        j = np.arange(-window, window + 1)
        return cls(np.abs(j) % 2, -window, "flat")

    @classmethod
    def stationary(cls, window: int, seed: int, rho: float = 0.5):
        p = profile_from_particles(ParticleConfig.bernoulli(window, rho, seed))
        object.__setattr__(p, "label", f"stationary({rho})")
        return p


def profile_from_particles(cfg: ParticleConfig) -> CurveProfile:
    """Step j is vertical iff eta_0(j) = 1; h(0) = (0,0)."""
    lo, hi = cfg.first_site - 1, cfg.last_site
    if lo > 0 or hi < 0:
        raise ValueError("particle window must straddle the origin")
    incr = 1 - 2 * cfg.occupancy.astype(np.int64)  # s_j - s_{j-1} for j in window
    s = np.empty(hi - lo + 1, dtype=np.int64)
    s[0] = 0
    s[1:] = np.cumsum(incr)
    s -= s[-lo]
    return CurveProfile(s, lo, cfg.label)


class CornerSet(NamedTuple):
    indices: np.ndarray
    points: list

    def __len__(self):
        return int(self.indices.size)

    def mask(self, profile: CurveProfile) -> np.ndarray:
        m = np.zeros(profile.heights.size, dtype=np.uint8)
        m[self.indices - profile.jlo] = 1
        return m


def corners(profile: CurveProfile) -> CornerSet:
    """Indices where a vertical step is followed by a horizontal one."""
    s = profile.heights
    if s.size < 3:
        return CornerSet(np.zeros(0, dtype=np.int64), [])
    inner = np.flatnonzero((s[:-2] - s[1:-1] == 1) & (s[2:] - s[1:-1] == 1)) + 1
    idx = inner + profile.jlo
    pts = [profile.point(int(j)) + (1, 1) for j in idx]
    return CornerSet(idx.astype(np.int64), pts)


def cutoff(profile: CurveProfile, r: float, n: int):
    """Split the corners into |index| <= r n^{2/3} and the rest."""
    if r <= 0 or n < 1:
        raise ValueError("need r > 0 and n >= 1")
    c = corners(profile)
    radius = lattice_floor(r * n ** (2.0 / 3.0))
    inside = np.abs(c.indices) <= radius
    keep = [p for p, ok in zip(c.points, inside) if ok]
    rest = [p for p, ok in zip(c.points, inside) if not ok]
    return (CornerSet(c.indices[inside], keep),
            CornerSet(c.indices[~inside], rest))


# ---------------------------------------------------------------- boundaries

@dataclass(frozen=True)
class BoundaryProfile:
    """Axis weights; ``axis_weights`` returns x- and y-axis arrays from 0.

    ``b(z)`` sums x-axis weights for z > 0 and y-axis weights for z < 0.
    Stationary and tilted kinds read the environment's axis streams; derived
    and custom kinds carry explicit cumulative arrays.
    """

    kind: str
    rho: float | None = None
    x_divisor: float = 1.0
    y_divisor: float = 1.0
    cum_x: np.ndarray | None = field(default=None, repr=False)
    cum_y: np.ndarray | None = field(default=None, repr=False)
    labels_x: np.ndarray | None = field(default=None, repr=False)
    labels_y: np.ndarray | None = field(default=None, repr=False)

    def spec(self) -> dict:
        out = {"kind": self.kind}
        if self.rho is not None:
            out["rho"] = self.rho
        return out

    def _base_weights(self, env: Environment, nx: int, ny: int):
        ex = np.zeros(nx + 1)
        ey = np.zeros(ny + 1)
        z = np.arange(1, nx + 1)
        ex[1:] = env.exp1(z, np.zeros_like(z), Stream.AXIS_X)
        z = np.arange(1, ny + 1)
        ey[1:] = env.exp1(np.zeros_like(z), z, Stream.AXIS_Y)
        return ex, ey

    def axis_weights(self, env: Environment, nx: int, ny: int):
        if self.cum_x is not None:
            bx, by = self.cumulative(env, nx, ny)
            return (np.concatenate([[0.0], np.diff(bx)]),
                    np.concatenate([[0.0], np.diff(by)]))
        ex, ey = self._base_weights(env, nx, ny)
        return ex / self.x_divisor, ey / self.y_divisor

    def cumulative(self, env: Environment, nx: int, ny: int):
        """(b(0..nx), b(0..-ny)) with index z holding b(z) and b(-z)."""
        if self.cum_x is not None:
            if nx >= self.cum_x.size or ny >= self.cum_y.size:
                raise ValueError(
                    f"{self.kind} boundary covers z in "
                    f"[-{self.cum_y.size - 1}, {self.cum_x.size - 1}], "
                    f"requested [-{ny}, {nx}]")
            return self.cum_x[: nx + 1].copy(), self.cum_y[: ny + 1].copy()
        wx, wy = self.axis_weights(env, nx, ny)
        return np.cumsum(wx), np.cumsum(wy)

    def b(self, env: Environment, z: int) -> float:
        bx, by = self.cumulative(env, max(z, 0), max(-z, 0))
        return float(bx[z]) if z >= 0 else float(by[-z])

    def exit_labels(self, nx: int, ny: int):
        """Labels carried by axis sites into the bulk recursion."""
        if self.labels_x is not None:
            return self.labels_x[: nx + 1], self.labels_y[: ny + 1]
        return np.arange(nx + 1), -np.arange(ny + 1)


def stationary_boundary(rho: float) -> BoundaryProfile:
    """Exp(1-rho) on the x-axis and Exp(rho) on the y-axis."""
    if not 0.0 < rho < 1.0:
        raise ValueError("rho must lie in (0, 1)")
    return BoundaryProfile("stationary", float(rho), 1.0 - rho, rho)


class TiltedPair(NamedTuple):
    plus: BoundaryProfile
    minus: BoundaryProfile


def tilted_pair_from_half(tp: TiltParameters) -> TiltedPair:
    """Rescale the rho = 1/2 axis weights into the rho+- profiles.

    The half profile has weights E/(1/2) = 2E; dividing by 2(1-rho) on the
    x-axis or 2 rho on the y-axis gives exactly E/(1-rho) and E/rho.
    """
    if not (tp.rho_minus <= 0.5 <= tp.rho_plus):
        raise ValueError("need rho- <= 1/2 <= rho+")
    half = stationary_boundary(0.5)

    def tilt(kind, rho):
        return BoundaryProfile(kind, rho,
                               half.x_divisor * (2.0 * (1.0 - rho)),
                               half.y_divisor * (2.0 * rho))

    return TiltedPair(tilt("tilted_plus", tp.rho_plus),
                      tilt("tilted_minus", tp.rho_minus))


def derived_boundary_from_curve(field) -> BoundaryProfile:
    """Boundary whose cumulative sums are L^h along the two axes."""
    if getattr(field, "mode", None) != "curve" or field.axis_x is None:
        raise ValueError("derived boundary needs a curve-mode field")
    if not (np.isfinite(field.axis_x).all() and np.isfinite(field.axis_y).all()):
        raise ValueError("curve field does not reach every axis site")
    return BoundaryProfile("derived_from_curve", None,
                           cum_x=field.axis_x.copy(), cum_y=field.axis_y.copy(),
                           labels_x=field.axis_labels_x.copy(),
                           labels_y=field.axis_labels_y.copy())


def custom_boundary(wx, wy) -> BoundaryProfile:
    """Explicit axis weights ``wx[z-1]`` at (z,0) and ``wy[z-1]`` at (0,z)."""
    wx = np.asarray(wx, dtype=np.float64)
    wy = np.asarray(wy, dtype=np.float64)
    if (wx < 0).any() or (wy < 0).any():
        raise ValueError("boundary weights must be nonnegative")
    cx = np.concatenate([[0.0], np.cumsum(wx)])
    cy = np.concatenate([[0.0], np.cumsum(wy)])
    return BoundaryProfile("custom", cum_x=cx, cum_y=cy)


# ---------------------------------------------------------------- specs

def default_window(top_level: int, reach: int) -> int:
    """Half-width covering the light cone of targets [i], |i| <= reach.

    At level d the cone reaches column top_level + 2 reach - d; a random-walk
    curve dips O(sqrt) below 0, hence the slack term.
    """
    span = top_level + 2 * reach
    return int(span + 6 * np.sqrt(span + 1) + 10)


def curve_from_spec(spec: dict, window: int, seed: int) -> CurveProfile:
    """Build a curve from a config dict such as {"kind": "flat"}."""
    kind = spec.get("kind")
    w = int(spec.get("window", window))
    if kind == "narrow_wedge":
        return CurveProfile.narrow_wedge(w)
    if kind == "flat":
        return CurveProfile.flat(w)
    if kind == "stationary":
        return CurveProfile.stationary(w, int(spec.get("seed", seed)),
                                       float(spec.get("rho", 0.5)))
    if kind == "particles":
        cfg = ParticleConfig.from_string(spec["bits"], int(spec["first_site"]))
        return profile_from_particles(cfg)
    if kind == "mixed":
        parts = []
        for side in ("left", "right"):
            sub = spec[side]
            sk = sub.get("kind")
            if sk == "step":
                parts.append(ParticleConfig.step(w))
            elif sk == "flat":
                parts.append(ParticleConfig.flat(w))
            elif sk == "stationary":
                parts.append(ParticleConfig.bernoulli(
                    w, float(sub.get("rho", 0.5)), int(sub.get("seed", seed))))
            elif sk == "empty":
                parts.append(ParticleConfig(np.zeros(2 * w, np.int8), -w + 1))
            elif sk == "full":
                parts.append(ParticleConfig(np.ones(2 * w, np.int8), -w + 1))
            else:
                raise ValueError(f"unknown half-line kind {sk!r}")
        p = profile_from_particles(ParticleConfig.mixed(*parts))
        object.__setattr__(p, "label", "mixed")
        return p
    raise ValueError(f"unknown curve kind {kind!r}")
