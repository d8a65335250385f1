"""KPZ-rescaled observables built from passage-time fields."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .environment import lattice_floor

# Every scale factor used by the observables lives here.
CONSTANTS = {
    "increment_normalizer": 2.0 ** 1.5,    # Delta_n denominator 2^{3/2} n^{1/3}
    "height_normalizer": 2.0 ** (4 / 3),   # H_n denominator 2^{4/3} n^{1/3}
    "height_space_factor": 2.0 ** (2 / 3),  # H_n samples L at [2^{2/3} x n^{2/3}]
    "height_increment_factor": 2.0 ** (1 / 6),  # H_n(x) - H_n(0) = 2^{1/6} Delta_n
    "height_centering": 4.0,               # H_n subtracts 4 n t
    "tasep_centering": 0.5,                # standardized TASEP height: t n / 2
    "tasep_space_factor": 2.0,             # TASEP height read at floor(2 x n^{2/3})
}


@dataclass(frozen=True)
class IncrementPath:
    grid: np.ndarray
    values: np.ndarray
    n: int
    t: float
    a: float
    lattice_index: np.ndarray

    def supnorm_distance(self, other: "IncrementPath") -> float:
        if not np.array_equal(self.grid, other.grid):
            raise ValueError("paths live on different grids")
        return float(np.max(np.abs(self.values - other.values)))

    def value_at(self, x: float) -> float:
        """Cadlag evaluation: the last grid point at or left of x."""
        pos = np.searchsorted(self.grid, x, side="right") - 1
        if pos < 0:
            raise ValueError("x left of the grid")
        return float(self.values[pos])


@dataclass(frozen=True)
class HeightPath:
    grid: np.ndarray
    values: np.ndarray
    n: int
    t: float
    lattice_index: np.ndarray


def _n23(n):
    return float(n) ** (2.0 / 3.0)


def _n13(n):
    return float(n) ** (1.0 / 3.0)


def default_grid(n: int, a: float, step: float | None = None) -> np.ndarray:
    """Grid on [-a, a] with default step n^{-2/3} (one site per point).

    The endpoints are always included: when a n^{2/3} is not an integer,
    u = -a sits one lattice index below the last multiple of the step.
    """
    step = 1.0 / _n23(n) if step is None else float(step)
    m = lattice_floor(a / step)
    g = np.arange(-m, m + 1) * step
    if g[0] > -a * (1 - 1e-12):
        g = np.concatenate([[-a], g])
    if g[-1] < a * (1 - 1e-12):
        g = np.concatenate([g, [a]])
    return g


def window_indices(n: int, a: float):
    """Lattice indices [floor(-a n^{2/3}), floor(a n^{2/3})] spanned by K_a."""
    return lattice_floor(-a * _n23(n)), lattice_floor(a * _n23(n))


def _indices(x, scale):
    return np.array([lattice_floor(v * scale) for v in np.asarray(x, float)],
                    dtype=np.int64)


def delta_process(field, n: int, t: float, a: float,
                  grid_step: float | None = None, grid=None) -> IncrementPath:
    """Delta_n(x,t) = (L[x n^{2/3}]_{tn} - L[0]_{tn}) / (2^{3/2} n^{1/3})."""
    if not 0 < a <= _n13(n) * (1 + 1e-12):
        raise ValueError(f"need 0 < a <= n^(1/3) = {_n13(n):.6g}")
    T = lattice_floor(t * n)
    if field.target.level != 2 * T:
        raise ValueError(f"field top level {field.target.level} != 2 floor(tn)")
    g = default_grid(n, a, grid_step) if grid is None else np.asarray(grid)
    if np.any(np.abs(g) > a * (1 + 1e-12)):
        raise ValueError("grid leaves [-a, a]")
    idx = _indices(g, _n23(n))
    lo, hi = field.i_range
    if idx.min() < lo or idx.max() > hi:
        raise ValueError(f"grid needs indices [{idx.min()}, {idx.max()}], "
                         f"field covers [{lo}, {hi}]")
    norm = CONSTANTS["increment_normalizer"] * _n13(n)
    vals = (field.at(idx) - field.at(0)) / norm
    return IncrementPath(g, vals, n, t, a, idx)


def h_process(field, n: int, t: float, grid) -> HeightPath:
    """H_n(x,t) = (L[2^{2/3} x n^{2/3}]_{tn} - 4nt) / (2^{4/3} n^{1/3})."""
    T = lattice_floor(t * n)
    if field.target.level != 2 * T:
        raise ValueError(f"field top level {field.target.level} != 2 floor(tn)")
    g = np.asarray(grid, dtype=float)
    idx = _indices(g, CONSTANTS["height_space_factor"] * _n23(n))
    lo, hi = field.i_range
    if idx.min() < lo or idx.max() > hi:
        raise ValueError("grid outside the field coverage")
    norm = CONSTANTS["height_normalizer"] * _n13(n)
    vals = (field.at(idx) - CONSTANTS["height_centering"] * n * t) / norm
    return HeightPath(g, vals, n, t, idx)


def height_identity_residual(hp: HeightPath, field, n: int, t: float):
    """H_n(x) - H_n(0) - 2^{1/6} Delta_n(2^{2/3} x) on the grid of ``hp``."""
    h0 = h_process(field, n, t, [0.0]).values[0]
    norm = CONSTANTS["increment_normalizer"] * _n13(n)
    delta = (field.at(hp.lattice_index) - field.at(0)) / norm
    return hp.values - h0 - CONSTANTS["height_increment_factor"] * delta


def height_grid(n: int, a: float) -> np.ndarray:
    """x values hitting each lattice index of H_n exactly once."""
    scale = CONSTANTS["height_space_factor"] * _n23(n)
    m = lattice_floor(a * scale)
    return np.arange(-m, m + 1) / scale


def standardized_height(height, n: int, t: float, grid):
    """(t n / 2 - h(floor(2 x n^{2/3}), t n)) / n^{1/3} from a height function.

    ``height`` is a HeightFunction at TASEP time t n.
    """
    g = np.asarray(grid, dtype=float)
    j = _indices(g, CONSTANTS["tasep_space_factor"] * _n23(n))
    if j.min() < height.jlo or j.max() > height.jhi:
        raise ValueError("height function does not cover the grid")
    h = height.values[j - height.jlo]
    return (CONSTANTS["tasep_centering"] * t * n - h) / _n13(n)


def rescale_for_corollary(pair, a_t: float):
    """Map paths on [-a, a] to v in [-1, 1] with values scaled by a^{-1/2}."""
    if a_t <= 0:
        raise ValueError("a_t must be positive")
    out = []
    for p in pair:
        if p.grid.min() > -a_t * (1 - 1e-12) or p.grid.max() < a_t * (1 - 1e-12):
            raise ValueError("path does not cover [-a_t, a_t]")
        keep = np.abs(p.grid) <= a_t * (1 + 1e-12)
        out.append(IncrementPath(p.grid[keep] / a_t,
                                 p.values[keep] / np.sqrt(a_t), p.n, p.t, 1.0,
                                 p.lattice_index[keep]))
    return tuple(out)
