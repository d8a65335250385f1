"""Wall-clock comparison of the numba and numpy wavefront kernels.

    python3 benchmarks/bench_kernels.py [--sizes 100 300 500] [--repeats 3]

Each case is run once untimed (JIT warm-up), then timed; outputs of the two
backends are compared bit for bit before any number is printed.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from lpplab import kernels
from lpplab.environment import Environment, Stream
from lpplab.profiles import CurveProfile, default_window, stationary_boundary


def _boundary_case(n, seed=7):
    env = Environment(seed)
    b = stationary_boundary(0.5)
    kA, kB = n - n // 4, n + n // 4
    bx, by = b.cumulative(env, kB, 2 * n - kA)
    lx, ly = b.exit_labels(kB, 2 * n - kA)
    key = env.key(Stream.BULK)
    return lambda backend: kernels.sweep_quadrant(
        key, 2 * n, kA, kB, bx[None], by[None], lx[None], ly[None], False,
        backend=backend)


def _curve_case(n, seed=7):
    env = Environment(seed)
    prof = CurveProfile.flat(default_window(2 * n, n // 4))
    allowed = np.ones(prof.heights.size, np.uint8)
    key = env.key(Stream.BULK)
    return lambda backend: kernels.sweep_curve(
        key, 2 * n, n - n // 4, n + n // 4, prof.jlo, prof.heights, allowed,
        False, False, backend=backend)


def _best(fn, backend, repeats):
    fn(backend)
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(backend)
        times.append(time.perf_counter() - t0)
    return min(times), out


def _same(a, b):
    return all(np.array_equal(x, y, equal_nan=True) if isinstance(x, np.ndarray)
               else x == y for x, y in zip(a, b))


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=int, nargs="+", default=[100, 300, 500])
    p.add_argument("--repeats", type=int, default=3)
    args = p.parse_args(argv)
    if "numba" not in kernels.available_backends():
        print("numba not available (or LPPLAB_NO_NUMBA set); nothing to compare")
        return 1
    print(f"{'case':<10}{'n':>6}{'numba s':>12}{'numpy s':>12}{'speedup':>10}")
    for name, make in (("boundary", _boundary_case), ("curve", _curve_case)):
        for n in args.sizes:
            fn = make(n)
            t_nb, out_nb = _best(fn, "numba", args.repeats)
            t_np, out_np = _best(fn, "numpy", args.repeats)
            if not _same(out_nb, out_np):
                raise SystemExit(f"backends disagree on {name} n={n}")
            print(f"{name:<10}{n:>6}{t_nb:>12.4f}{t_np:>12.4f}{t_np / t_nb:>10.1f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
