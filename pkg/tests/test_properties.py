"""Property tests for the structural invariants."""
import numpy as np
from hypothesis import given, strategies as st

from lpplab.coupling import (basic_couple, check_attract_increase,
                             comparison_lemma_counts, exit_monotonicity_violations,
                             increment_gap, sandwich_supnorm, tilt_ordering_violations,
                             verify_shared_bulk)
from lpplab.environment import Environment, Stream, TiltParameters
from lpplab.lpp import (Segment, boundary_fields, curve_field, geodesic_backtrack,
                        lpp_from_boundary, lpp_point_to_point, point_to_point_field)
from lpplab.profiles import (CurveProfile, ParticleConfig, corners,
                             profile_from_particles, stationary_boundary,
                             tilted_pair_from_half)
from lpplab.scaling import delta_process, window_indices
from lpplab.stats import increment_cdf, ks_one_sample, wilson_interval
from lpplab.tasep import direct_tasep, height_from_occupation, talpp_violations

seeds = st.integers(min_value=0, max_value=2 ** 32)
bits = st.lists(st.integers(0, 1), min_size=4, max_size=40)


@given(seeds, st.integers(-50, 50), st.integers(-50, 50))
def test_environment_is_pure(seed, k, l):
    a, b = Environment(seed), Environment(seed)
    assert a.exp1(k, l) == b.exp1(k, l)
    w = a.exp1(k, l)
    assert abs(w + np.log(a.uniform(k, l))) <= 2 * np.spacing(w)
    box = a.weights_box(k, k + 3, l, l + 2)
    assert np.array_equal(box, b.weights_box(k, k + 3, l, l + 2))


def test_weights_have_no_lag_one_correlation():
    env = Environment(12)
    w = env.weights_box(1, 1000, 1, 1000)
    rows = np.corrcoef(w[:-1, :].ravel(), w[1:, :].ravel())[0, 1]
    anti = np.corrcoef(w[:-1, 1:].ravel(), w[1:, :-1].ravel())[0, 1]
    assert abs(rows) < 0.01 and abs(anti) < 0.01


@given(bits, st.integers(0, 3))
def test_profile_steps_and_corner_scan(occ, shift):
    cfg = ParticleConfig(np.array(occ, np.int8), -len(occ) // 2 + shift // 2)
    try:
        prof = profile_from_particles(cfg)
    except ValueError:
        return  # the window does not straddle the origin
    assert np.all(np.isin(np.diff(prof.heights), (-1, 1)))
    s = prof.heights
    scan = [prof.jlo + m for m in range(1, s.size - 1)
            if s[m - 1] - s[m] == 1 and s[m + 1] - s[m] == 1]
    assert list(corners(prof).indices) == scan


@given(seeds, st.integers(20, 400))
def test_tilts_are_increment_ordered(seed, n):
    tp = TiltParameters.from_scaling(n, 1.0, 1.0, 0.25)
    run = basic_couple(seed, [{"kind": "tilted_minus"}, {"kind": "half"},
                              {"kind": "tilted_plus"}], n, 1.0, 1.0, tilt=tp)
    assert tilt_ordering_violations(run) == 0
    assert exit_monotonicity_violations(run) == 0


def test_tilted_marginals():
    tp = TiltParameters.from_scaling(100, 1.0, 1.0, 0.25)
    pair = tilted_pair_from_half(tp)
    env = Environment(31)
    for b, rho in ((pair.plus, tp.rho_plus), (pair.minus, tp.rho_minus)):
        wx, wy = b.axis_weights(env, 5000, 5000)
        # x-axis Exp(1 - rho), y-axis Exp(rho)
        assert ks_one_sample(wx[1:], lambda z: 1 - np.exp(-(1 - rho) * z)).passed
        assert ks_one_sample(wy[1:], lambda z: 1 - np.exp(-rho * z)).passed


@given(seeds, st.integers(2, 12), st.integers(2, 12))
def test_recurrence_holds_at_every_bulk_site(seed, K, L):
    env = Environment(seed)
    f = point_to_point_field(env, (1, 1), (K, L))
    for k in range(1, K + 1):
        for l in range(1, L + 1):
            if (k, l) == (1, 1):
                continue
            west = f.value(k - 1, l) if k > 1 and f.covers(k - 1, l) else -np.inf
            south = f.value(k, l - 1) if l > 1 and f.covers(k, l - 1) else -np.inf
            assert f.value(k, l) == env.exp1(k, l) + max(west, south)


@given(seeds, st.integers(3, 10), st.integers(3, 10))
def test_split_at_geodesic_points_is_exact(seed, K, L):
    env = Environment(seed)
    f = point_to_point_field(env, (1, 1), (K, L))
    g = geodesic_backtrack(f, env, (K, L))
    total = f.value(K, L)
    on = set(map(tuple, g.points))
    for c in [(1 + (K - 1) // 2, 1 + (L - 1) // 2), (2, L - 1)]:
        split = lpp_point_to_point(env, (1, 1), c) + \
            lpp_point_to_point(env, c, (K, L)) - env.exp1(*c)
        if tuple(c) in on:
            assert abs(split - total) <= 1e-9
        else:
            assert split <= total + 1e-9


@given(seeds, st.floats(0.2, 0.8))
def test_frontier_and_full_agree(seed, rho):
    env = Environment(seed)
    seg = Segment(40, 15, 25)
    a = boundary_fields(env, [stationary_boundary(rho)], seg, "frontier")[0]
    b = boundary_fields(env, [stationary_boundary(rho)], seg, "full")[0]
    assert np.array_equal(a.top_values, b.top_values)
    assert np.array_equal(a.top_labels, b.top_labels)


@given(seeds, st.floats(0.2, 0.8), st.floats(0.2, 0.8))
def test_comparison_lemma_is_pathwise(seed, r1, r2):
    run = basic_couple(seed, [{"kind": "stationary", "rho": r1, "name": "a"},
                              {"kind": "stationary", "rho": r2, "name": "b"},
                              {"curve": {"kind": "stationary"}, "name": "h"}],
                       30, 1.0, 1.0, i_range=(-30, 30), storage="full")
    assert verify_shared_bulk(run) == 0
    for m1, m2 in (("a", "b"), ("b", "a"), ("a", "h"), ("h", "b")):
        assert comparison_lemma_counts(run, m1, m2).violations == 0
    lo, hi = ("a", "b") if r1 <= r2 else ("b", "a")
    assert check_attract_increase(run, lo, hi).ok


@given(seeds, st.integers(50, 300), st.sampled_from(["flat", "stationary", "narrow_wedge"]))
def test_sandwich_holds_on_E(seed, n, kind):
    run = basic_couple(seed, [{"curve": {"kind": kind}, "name": "h"}, {"kind": "half"},
                              {"kind": "tilted_plus"}, {"kind": "tilted_minus"}],
                       n, 1.0, 1.0, 0.25)
    rep = sandwich_supnorm(run, "h")
    assert rep.I_n >= 0 and rep.attract_coupling_violations == 0
    if rep.event_E:
        assert rep.sandwich_violations == 0 and not rep.supnorm_violation


@given(seeds, st.integers(10, 80))
def test_delta_telescopes_over_blocks(seed, n):
    lo, hi = window_indices(n, 1.0)
    f = lpp_from_boundary(Environment(seed), stationary_boundary(0.5), n, 1.0, (lo, hi))
    d = delta_process(f, n, 1.0, 1.0)
    assert d.value_at(0.0) == 0.0
    v = f.at(np.arange(lo, hi + 1))
    assert abs(np.sum(np.diff(v)) - (v[-1] - v[0])) < 1e-9


@given(seeds, st.sampled_from([0.5, 1.5, 3.0, 6.0]))
def test_talpp_biconditional(seed, t):
    prof = CurveProfile.stationary(40, seed % 1000)
    f = curve_field(Environment(seed), prof, Segment(40, 10, 30), storage="full")
    assert talpp_violations(f, t) == 0
    h = height_from_occupation(f, t)
    assert np.all(np.abs(np.diff(h.values)) == 1)


@given(seeds)
def test_jump_counter_is_monotone(seed):
    traj = direct_tasep(ParticleConfig.bernoulli(20, 0.5, seed % 1000), 4.0, seed)
    counts = [traj.N(t) for t in np.linspace(0, 4, 9)]
    assert counts == sorted(counts)


def test_increment_gap_mean():
    n = 100
    tp = TiltParameters.from_scaling(n, 1.0, 1.0, 0.25)
    rp, rm = tp.rho_plus, tp.rho_minus
    target = (1 / ((1 - rp) * (1 - rm)) + 1 / (rp * rm)) * (rp - rm)
    means = []
    for s in range(400):
        run = basic_couple(s, [{"kind": "tilted_plus"}, {"kind": "tilted_minus"}],
                           n, 1.0, 1.0, tilt=tp, i_range=(-n, n))
        means.append(increment_gap(run).mean())
    means = np.asarray(means)
    assert abs(means.mean() - target) <= 3 * means.std(ddof=1) / np.sqrt(means.size)


def test_wilson_coverage():
    rng = np.random.default_rng(5)
    p, trials = 0.2, 200
    hits = 0
    for _ in range(1000):
        lo, hi = wilson_interval(int(rng.binomial(trials, p)), trials)
        hits += lo <= p <= hi
    assert 0.93 <= hits / 1000 <= 0.97


def test_increment_cdf_matches_sampling():
    rng = np.random.default_rng(6)
    x = rng.exponential(1 / 0.4, 20000) - rng.exponential(1 / 0.6, 20000)
    assert ks_one_sample(x, lambda z: increment_cdf(z, 0.6)).passed
