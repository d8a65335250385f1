"""Counter-based random environments.

Every random quantity is a pure function of ``(seed, stream, k, l)``. A site
code is an odd 53-bit integer obtained by a bijective hash of the packed
coordinates, so distinct sites never share a uniform and no value is ever 0.
Coupled models simply read the same function.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import NamedTuple

import numpy as np

from . import kernels

RNG_KIND = "splitmix64-sitehash-v1"
_MASK = (1 << 64) - 1
_SALT = 0x6C62272E07BB0142
_GOLDEN = 0x9E3779B97F4A7C15
_COORD_LIMIT = 1 << 31


class Stream(IntEnum):
    BULK = 0
    AXIS_X = 1
    AXIS_Y = 2
    PARTICLES = 3
    TASEP_CLOCKS = 4
    CALIBRATION = 5


class LatticePoint(NamedTuple):
    k: int
    l: int

    def __add__(self, other):  # type: ignore[override]
        return LatticePoint(self.k + other[0], self.l + other[1])

    def leq(self, other) -> bool:
        return self.k <= other[0] and self.l <= other[1]


def _mix_int(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def stream_key(seed: int, stream: int) -> int:
    """64-bit key for one (seed, stream) pair."""
    base = _mix_int((seed & _MASK) ^ _SALT)
    return _mix_int((base + (int(stream) + 1) * _GOLDEN) & _MASK)


def _check_coords(k, l):
    k = np.asarray(k, dtype=np.int64)
    l = np.asarray(l, dtype=np.int64)
    if k.size and (np.abs(k).max() >= _COORD_LIMIT
                   or np.abs(l).max() >= _COORD_LIMIT):
        raise ValueError("lattice coordinates must satisfy |k|, |l| < 2**31")
    return k, l


@dataclass(frozen=True)
class Environment:
    seed: int
    rng_kind: str = RNG_KIND

    def __post_init__(self):
        if not 0 <= int(self.seed) <= _MASK:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.rng_kind != RNG_KIND:
            raise ValueError(f"unsupported generator {self.rng_kind!r}")

    def key(self, stream: int = Stream.BULK) -> int:
        return stream_key(int(self.seed), int(stream))

    def codes(self, k, l, stream: int = Stream.BULK):
        k, l = _check_coords(k, l)
        return kernels.site_codes(self.key(stream), k, l)

    def uniform(self, k, l, stream: int = Stream.BULK):
        """Uniform(0,1) variates; scalar in, scalar out."""
        u = self.codes(k, l, stream) * 2.0 ** -53
        return float(u) if np.ndim(u) == 0 else u

    def exp1(self, k, l, stream: int = Stream.BULK):
        """Exp(1) variates -ln U at arbitrary sites of Z^2.

        Curve models place corners at sites with negative coordinates, so
        the bulk environment is defined on the whole lattice.
        """
        w = kernels.neglog_codes(self.codes(k, l, stream))
        return float(w) if np.ndim(w) == 0 else w

    def weights_box(self, k0: int, k1: int, l0: int, l1: int):
        """Bulk weights on [k0,k1] x [l0,l1], indexed [k-k0, l-l0]."""
        kk, ll = np.meshgrid(np.arange(k0, k1 + 1), np.arange(l0, l1 + 1),
                             indexing="ij")
        return self.exp1(kk, ll, Stream.BULK)


def bulk_weight(env: Environment, p) -> float:
    k, l = int(p[0]), int(p[1])
    if k < 1 or l < 1:
        raise ValueError(f"bulk sites have k >= 1 and l >= 1, got {(k, l)}")
    return env.exp1(k, l, Stream.BULK)


def uniform_source(env: Environment, p, stream: int) -> float:
    return env.uniform(int(p[0]), int(p[1]), int(stream))


@dataclass(frozen=True)
class TiltParameters:
    rho_plus: float
    rho_minus: float
    n: int
    t: float
    a: float
    alpha: float
    delta_t: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 0.5:
            raise ValueError("alpha must lie in (0, 1/2)")
        if self.t < self.a ** 1.5:
            raise ValueError("need t >= a**(3/2) so that delta_t <= 1")
        if not (0.0 < self.rho_minus <= 0.5 <= self.rho_plus < 1.0):
            raise ValueError(
                f"tilted densities must satisfy 0 < rho- <= 1/2 <= rho+ < 1, "
                f"got rho-={self.rho_minus}, rho+={self.rho_plus}")

    @classmethod
    def from_scaling(cls, n: int, t: float, a: float, alpha: float):
        """Densities 1/2 +- delta_t**(-alpha) / (t n)**(1/3)."""
        if n < 1 or t <= 0 or a <= 0:
            raise ValueError("need n >= 1, t > 0, a > 0")
        if t < a ** 1.5:
            raise ValueError("need t >= a**(3/2) so that delta_t <= 1")
        delta = a * t ** (-2.0 / 3.0)
        gap = delta ** (-alpha) / (t * n) ** (1.0 / 3.0)
        tp = cls(rho_plus=0.5 + gap, rho_minus=0.5 - gap, n=int(n), t=float(t),
                 a=float(a), alpha=float(alpha), delta_t=delta)
        if not tp.rho_minus < 0.5 < tp.rho_plus:
            raise ValueError("tilt collapsed to 1/2 in floating point")
        return tp

    @property
    def strict(self) -> bool:
        return self.rho_minus < 0.5 < self.rho_plus

    def expected_increment_gap(self) -> float:
        """E(zeta^{rho+} - zeta^{rho-}) for one anti-diagonal step."""
        rp, rm = self.rho_plus, self.rho_minus
        return (1.0 / ((1 - rp) * (1 - rm)) + 1.0 / (rp * rm)) * (rp - rm)


def lattice_floor(x: float) -> int:
    """Floor that forgives representation error just below an integer.

    Scale factors such as 1000**(2/3) evaluate to 99.99999999999997; a plain
    floor would then place targets one site off.
    """
    r = round(x)
    if abs(x - r) <= 1e-9 * max(1.0, abs(x)):
        return int(r)
    return math.floor(x)
