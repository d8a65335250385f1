"""Acceptance criteria 1-9 at their stated sizes and tolerances.

Each test records a one-line verdict (see the "acceptance criteria" section
of the pytest summary). Criterion 7 needs far more compute than one core
provides; it runs only when ``LPPLAB_ACCEPT_BUDGET_S`` covers the estimated
cost and otherwise fails with the estimate.
"""
import math
import os
import time

import numpy as np
import pytest

from lpplab.cli import main as cli_main, tasep_compare
from lpplab.coupling import convergence_experiment, convergence_sample, ConvergenceTask
from lpplab.environment import Environment
from lpplab.lpp import antidiagonal_increments, exit_points, lpp_from_boundary
from lpplab.profiles import stationary_boundary
from lpplab.scaling import delta_process, window_indices
from lpplab.stats import (exit_localization_curves, increment_cdf, ks_one_sample,
                          loglog_slope, mean_within, relative_variance_errors)
from lpplab.verify import lemma_suite, oracle_suite, talpp_suite

from acceptance_log import record
import oracles

pytestmark = [pytest.mark.acceptance, pytest.mark.slow]


def test_criterion_1_oracle_equivalence():
    t0 = time.perf_counter()
    rep = oracle_suite(1000)
    dt = time.perf_counter() - t0
    modes = ("point", "boundary", "curve")
    ok = (all(rep[m]["instances"] == 1000 and rep[m]["mismatches"] == 0
              and rep[m]["max_abs_error"] <= 1e-9 for m in modes) and dt < 60)
    detail = ", ".join(f"{m}: {rep[m]['mismatches']}/{rep[m]['instances']} "
                       f"(max err {rep[m]['max_abs_error']:.1e})" for m in modes)
    assert record(1, "oracle equivalence", ok, f"{detail}; {dt:.1f} s"), rep


def test_criterion_2_exact_lemma_suite():
    t0 = time.perf_counter()
    rep = lemma_suite((50, 200), range(200))
    dt = time.perf_counter() - t0
    on_e = {n: rep[n]["on_E"] for n in ("50", "200")}
    applicable = sum(rep[n]["comparison_applicable"] for n in ("50", "200"))
    ok = rep["violations"] == 0 and dt < 300 and applicable > 0
    assert record(2, "exact lemma suite", ok,
                  f"{rep['violations']} violations over 200 seeds x n in {{50, 200}}; "
                  f"comparison pairs applicable {applicable}; samples on E {on_e}; "
                  f"{dt:.1f} s"), rep


def _stationary_increments(rho, n, seeds):
    return np.concatenate([
        antidiagonal_increments(lpp_from_boundary(Environment(s), stationary_boundary(rho),
                                                  n, 1.0, (-n, n)), n)
        for s in seeds])


def test_criterion_3_stationary_increments_law():
    n = 500
    half = _stationary_increments(0.5, n, range(200))
    ks = ks_one_sample(half, lambda z: increment_cdf(z, 0.5), level=0.01)
    tilted = _stationary_increments(0.7, n, range(200))
    target = oracles.increment_mean(0.7)
    mean = mean_within(tilted, target, sigmas=3)
    ok = ks.passed and mean.passed
    assert record(3, "stationary increments law", ok,
                  f"KS {ks.statistic:.5f} vs threshold {ks.threshold:.5f} "
                  f"(N={ks.sample_size}); mean zeta^0.7 {mean.calibration['mean']:.4f} "
                  f"vs {target:.4f}, |diff| {mean.statistic:.4f} <= {mean.threshold:.4f}"), (ks, mean)


def test_criterion_4_brownian_normalization():
    n, seeds = 1000, 10_000
    points = [0.5, 1.0, 2.0]
    grid = np.array([-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0])
    lo, hi = window_indices(n, 2.0)
    vals = np.empty((seeds, grid.size))
    for s in range(seeds):
        f = lpp_from_boundary(Environment(s), stationary_boundary(0.5), n, 1.0, (lo, hi))
        vals[s] = delta_process(f, n, 1.0, 2.0, grid=grid).values
    err = relative_variance_errors(vals, grid, points)
    ok = all(e <= 0.05 for e in err.values())
    assert record(4, "Brownian normalization", ok,
                  "relative errors " + ", ".join(f"x={x}: {e:.4f}" for x, e in err.items())
                  + " (limit 0.05)"), err


def _exit_labels(rho, n, seeds):
    return np.array([exit_points(lpp_from_boundary(Environment(s), stationary_boundary(rho),
                                                   n, 1.0, (0, 0)), n)[0].label
                     for s in seeds])


def test_criterion_5_characteristic_direction():
    n = 2000
    z = _exit_labels(0.6, n, range(500))
    target = oracles.characteristic_exit(0.6)
    got = float(z.mean() / n)
    ok = abs(got - target) <= 0.05
    assert record(5, "characteristic direction", ok,
                  f"mean Z/n {got:.4f} vs 1-d_rho {target:.4f} (tolerance 0.05)"), got


def test_criterion_6_exit_tail_shape():
    n = 2000
    z = _exit_labels(0.5, n, range(2000))
    r = np.arange(1.0, 4.01, 0.5)
    curve = exit_localization_curves(z, n, r, 0.0, c2=1.0, label="Z")
    slope, used = loglog_slope(curve, 1.0, 4.0)
    ok = used >= 2 and slope <= -2.5
    probs = ", ".join(f"{a:g}:{p:.3f}" for a, p in zip(r, curve.probabilities))
    assert record(6, "exit-tail shape", ok,
                  f"log-log slope {slope:.3f} over r in [1,4] from {used} points "
                  f"(needs <= -2.5); P(|Z| > r n^2/3) = {probs}; 2000 seeds"), slope


def _budget_seconds():
    return float(os.environ.get("LPPLAB_ACCEPT_BUDGET_S", "1800"))


def test_criterion_7_ergodicity_trend():
    n, seeds, ladder = 500, 2000, [1.0, 4.0, 16.0, 64.0]
    profiles = [{"kind": "flat"}, {"kind": "stationary"}]
    # cost of one sample grows like (t n)^2; probe at t=4 and extrapolate
    t0 = time.perf_counter()
    convergence_sample(ConvergenceTask(0, {"kind": "flat"}, n, 4.0, 1.0, 0.25))
    probe = time.perf_counter() - t0
    estimate = len(profiles) * seeds * sum(probe * (t / 4.0) ** 2 for t in ladder)
    budget = _budget_seconds()
    if estimate > budget:
        record(7, "ergodicity trend", False,
               f"not run: estimated {estimate / 3600:.1f} h on this machine "
               f"({probe:.2f} s per sample at t=4, x(t/4)^2) exceeds the budget "
               f"{budget:.0f} s; set LPPLAB_ACCEPT_BUDGET_S to run it")
        pytest.fail(f"criterion 7 needs about {estimate / 3600:.1f} h of compute")
    lines, ok = [], True
    for prof in profiles:
        rep = convergence_experiment(prof, n, ladder, 1.0, 0.25, 0.25, range(seeds))
        p = rep["tail"].probabilities
        halved = p[-1] <= 0.5 * p[0]
        bound = all(q["I_n_raw_mean"] <= q["I_n_bound"] for q in rep["per_t"])
        clean = all(q["violations"] == 0 for q in rep["per_t"])
        ok &= halved and bound and clean
        lines.append(f"{prof['kind']}: P(t=1)={p[0]:.3f} P(t=64)={p[-1]:.3f} "
                     f"I_n bound {'ok' if bound else 'exceeded'}")
    assert record(7, "ergodicity trend", ok, "; ".join(lines))


def test_criterion_8_talpp_equivalence():
    exact = talpp_suite(range(100), side=50)
    ks, direct, lpp = tasep_compare(16.0, 5000)
    ok = exact["violations"] == 0 and ks.passed
    assert record(8, "TALPP equivalence", ok,
                  f"{exact['violations']} biconditional/evolution violations over "
                  f"{exact['checks']} (profile, seed, t) checks; two-sample KS "
                  f"{ks.statistic:.4f} vs {ks.threshold:.4f} on 5000+5000 h(0,16) values "
                  f"(means {np.mean(direct):.3f} / {np.mean(lpp):.3f})"), (exact, ks)


def _tree(d):
    return {p.relative_to(d).as_posix(): p.read_bytes()
            for p in sorted(d.rglob("*")) if p.is_file()}


def test_criterion_9_determinism(tmp_path):
    runs = {
        "simulate": ["simulate", "--n", "100", "--seeds", "6"],
        "converge": ["converge", "--n", "64", "--seeds", "12", "--t-ladder", "1", "2", "4"],
        "exitpoints": ["exitpoints", "--n", "200", "--seeds", "12"],
        "verify": ["verify", "--seeds", "3", "--n-list", "30", "--oracle-instances", "20"],
        "tasep-check": ["tasep-check", "--seeds", "200", "--tasep-t", "4",
                        "--tasep-ladder", "0", "2"],
    }
    mismatched = []
    for name, argv in runs.items():
        outs = []
        for tag, workers in (("a", 1), ("b", 1), ("c", 3)):
            d = tmp_path / f"{name}-{tag}"
            code = cli_main(argv + ["--workers", str(workers), "--out", str(d)])
            assert code in (0, 1)
            outs.append(_tree(d))
        if not (outs[0] == outs[1] == outs[2] and outs[0]):
            mismatched.append(name)
    ok = not mismatched
    assert record(9, "determinism", ok,
                  "byte-identical outputs for " + ", ".join(runs)
                  + " across reruns and workers {1, 3}" if ok
                  else f"outputs differ for {mismatched}")
