"""Backend selection for the wavefront kernels.

The compiled backend is used unless ``LPPLAB_NO_NUMBA=1`` is set or numba
cannot be imported. Both backends return identical bits; the choice only
affects speed.
"""
from __future__ import annotations

import os

import numpy as np

from . import _kernels_numpy as _np_impl

_nb_impl = None
if os.environ.get("LPPLAB_NO_NUMBA", "").strip() not in ("1", "true", "yes"):
    try:
        from . import _kernels_numba as _nb_impl
    except ImportError:  # pragma: no cover - depends on the install
        _nb_impl = None

BACKEND = "numba" if _nb_impl is not None else "numpy"


def available_backends():
    return ("numba", "numpy") if _nb_impl is not None else ("numpy",)


def _resolve(backend):
    backend = backend or BACKEND
    if backend == "numba" and _nb_impl is None:
        raise RuntimeError("numba backend requested but not available")
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    return backend


def site_codes(key, k, l):
    return _np_impl.site_codes(key, k, l)


def neglog_codes(codes):
    return _np_impl.neglog_codes(codes)


def level_weights(key, d, k0, count, backend=None):
    if _resolve(backend) == "numba":
        out = np.empty(count)
        _nb_impl.fill_weights(np.uint64(key), d, k0, count, out,
                              np.empty(count, np.int64), np.empty(count))
        return out
    return _np_impl.level_weights(key, d, k0, count)


def sweep_quadrant(key, D, kA, kB, bx, by, aux_x, aux_y, full,
                   backend=None):
    bx = np.ascontiguousarray(bx, dtype=np.float64)
    by = np.ascontiguousarray(by, dtype=np.float64)
    aux_x = np.ascontiguousarray(aux_x, dtype=np.int64)
    aux_y = np.ascontiguousarray(aux_y, dtype=np.int64)
    if _resolve(backend) == "numba":
        return _nb_impl.sweep_quadrant(np.uint64(key), D, kA, kB, bx, by,
                                       aux_x, aux_y, bool(full))
    return _np_impl.sweep_quadrant(key, D, kA, kB, bx, by, aux_x, aux_y,
                                   bool(full))


def sweep_curve(key, D, kA, kB, jlo, s, allowed, outside_only, full,
                backend=None):
    s = np.ascontiguousarray(s, dtype=np.int64)
    allowed = np.ascontiguousarray(allowed, dtype=np.uint8)
    if _resolve(backend) == "numba":
        seed_ok = _np_impl.corner_mask(s) & allowed
        d0 = min(int(s.min()) + 2, D)
        klo, khi = _np_impl.curve_level_bounds(D, kA, kB, jlo,
                                               jlo + s.size - 1, d0)
        res = _nb_impl.sweep_curve(np.uint64(key), D, kA, kB, jlo, s,
                                   seed_ok, d0, klo, khi, bool(outside_only),
                                   bool(full))
        top_v, top_k, ax, ay, lx, ly, fv, fk, offsets, clipped = res
        return (top_v, top_k, ax, ay, lx, ly, fv, fk, offsets, klo, khi, d0,
                bool(clipped))
    return _np_impl.sweep_curve(key, D, kA, kB, jlo, s, allowed,
                                bool(outside_only), bool(full))
