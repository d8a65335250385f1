import numpy as np
import pytest

from lpplab.environment import Environment, TiltParameters
from lpplab.lpp import (Segment, boundary_fields, curve_field, lpp_from_curve,
                        point_to_point_field)
from lpplab.profiles import (CurveProfile, ParticleConfig, corners,
                             curve_from_spec, custom_boundary, cutoff,
                             derived_boundary_from_curve, profile_from_particles,
                             stationary_boundary, tilted_pair_from_half)


def test_packed_particles_give_the_wedge_arm():
    cfg = ParticleConfig(np.ones(10, np.int8), -9)
    prof = profile_from_particles(cfg)
    # every step vertical: h(j) = (0, -j) for j < 0 read as s_j = -j
    assert [tuple(prof.point(j)) for j in range(-10, 1)] == \
        [(0, -j) for j in range(-10, 1)]


def test_alternating_particles_give_the_flat_staircase():
    prof = profile_from_particles(ParticleConfig.flat(20))
    assert set(np.unique(prof.heights)) == {0, 1}
    assert np.array_equal(prof.heights, CurveProfile.flat(20).heights)


def test_bernoulli_half_has_no_drift():
    ends = []
    for s in range(400):
        p = CurveProfile.stationary(50, s)
        ends.append(int(p.height(50)))
    ends = np.asarray(ends)
    assert abs(ends.mean()) <= 3 * ends.std(ddof=1) / np.sqrt(ends.size)


def test_corners():
    assert list(corners(CurveProfile.narrow_wedge(8)).indices) == [0]
    assert tuple(corners(CurveProfile.narrow_wedge(8)).points[0]) == (1, 1)
    flat = corners(CurveProfile.flat(8))
    assert np.all(np.diff(flat.indices) == 2)
    assert 0 in flat.indices
    mono = CurveProfile(np.arange(-5, 6), -5)  # all horizontal steps
    assert len(corners(mono)) == 0


def test_profile_validation():
    with pytest.raises(ValueError):
        CurveProfile(np.array([0, 2, 3]), 0)
    with pytest.raises(ValueError):
        CurveProfile(np.array([1, 0, 1]), -2)
    with pytest.raises(ValueError):
        ParticleConfig(np.array([0, 2]), 0)


def test_stationary_axis_means():
    env = Environment(1)
    half = stationary_boundary(0.5)
    wx, _ = half.axis_weights(env, 100_000, 1)
    assert abs(wx[1:].mean() - 2.0) < 0.02
    _, wy = stationary_boundary(0.7).axis_weights(env, 1, 100_000)
    assert abs(wy[1:].mean() - 1 / 0.7) < 0.02
    assert half.b(env, 0) == 0.0


def test_tilted_pair_orders_increments_pathwise():
    tp = TiltParameters.from_scaling(200, 1.0, 1.0, 0.25)
    pair = tilted_pair_from_half(tp)
    half = stationary_boundary(0.5)
    for s in range(20):
        env = Environment(s)
        bm = np.concatenate([pair.minus.cumulative(env, 0, 80)[1][::-1],
                             pair.minus.cumulative(env, 80, 0)[0][1:]])
        bh = np.concatenate([half.cumulative(env, 0, 80)[1][::-1],
                             half.cumulative(env, 80, 0)[0][1:]])
        bp = np.concatenate([pair.plus.cumulative(env, 0, 80)[1][::-1],
                             pair.plus.cumulative(env, 80, 0)[0][1:]])
        # z runs -80..80; b(z) for z < 0 sums y-axis weights, so it falls
        assert np.all(np.diff(bm) <= np.diff(bh) + 1e-12)
        assert np.all(np.diff(bh) <= np.diff(bp) + 1e-12)


def test_degenerate_tilt_reproduces_half():
    tp = TiltParameters(0.5, 0.5, 100, 1.0, 1.0, 0.25, 1.0)
    pair = tilted_pair_from_half(tp)
    env = Environment(4)
    half = stationary_boundary(0.5)
    for b in pair:
        assert np.array_equal(b.cumulative(env, 30, 30)[0], half.cumulative(env, 30, 30)[0])
        assert np.array_equal(b.cumulative(env, 30, 30)[1], half.cumulative(env, 30, 30)[1])


def test_tilted_plus_mean():
    tp = TiltParameters.from_scaling(50, 1.0, 1.0, 0.25)
    wx, _ = tilted_pair_from_half(tp).plus.axis_weights(Environment(8), 100_000, 1)
    assert wx[1:].mean() == pytest.approx(1 / (1 - tp.rho_plus), rel=0.01)


def test_derived_boundary_of_the_wedge_is_point_to_point():
    env = Environment(13)
    N = 50
    wedge = CurveProfile.narrow_wedge(2 * N + 20)
    f = curve_field(env, wedge, Segment(2 * N, 1, 2 * N - 1), outside_only=True)
    b = derived_boundary_from_curve(f)
    assert b.b(env, 0) == 0.0
    got = boundary_fields(env, [b], Segment.point(N, N), "full")[0]
    ref = point_to_point_field(env, (1, 1), (N, N))
    for k in range(1, N + 1, 7):
        for l in range(1, N + 1, 5):
            assert got.value(k, l) == ref.value(k, l)


def test_derived_boundary_matches_curve_field():
    for s in range(100):
        env = Environment(s)
        prof = CurveProfile.stationary(90, s)
        D = 60
        seg = Segment(D, 0, D)
        direct = curve_field(env, prof, seg, storage="full")
        ax = curve_field(env, prof, seg, outside_only=True)
        via = boundary_fields(env, [derived_boundary_from_curve(ax)], seg, "full")[0]
        for k in range(1, 30, 3):
            for l in range(1, 30, 4):
                assert via.value(k, l) == pytest.approx(direct.value(k, l), abs=1e-9)


def test_cutoff_partition_reassembles_the_field():
    for s in range(100):
        env = Environment(s)
        prof = CurveProfile.stationary(80, s)
        inner, outer = cutoff(prof, 0.5, 64)
        T = (s % 7) + 20
        seg = Segment(2 * T, T - 3, T + 3)
        full = lpp_from_curve(env, prof, seg)
        a = curve_field(env, prof, seg, corners=inner, require_reach=False)
        b = curve_field(env, prof, seg, corners=outer, require_reach=False)
        assert np.allclose(np.maximum(a.top_values, b.top_values), full.top_values,
                           rtol=0, atol=1e-9)


def test_cutoff_extremes():
    wedge = CurveProfile.narrow_wedge(20)
    inner, outer = cutoff(wedge, 1e-9, 100)
    assert list(inner.indices) == [0] and len(outer) == 0
    flat = CurveProfile.flat(20)
    inner, outer = cutoff(flat, 100.0, 10)
    assert len(outer) == 0 and len(inner) == len(corners(flat))


def test_specs_and_custom_boundary():
    assert curve_from_spec({"kind": "flat"}, 10, 0).label == "flat"
    mixed = curve_from_spec({"kind": "mixed", "left": {"kind": "step"},
                             "right": {"kind": "flat"}}, 10, 0)
    assert mixed.height(0) == 0
    b = custom_boundary([1.0, 2.0], [3.0])
    assert b.b(Environment(0), 2) == 3.0 and b.b(Environment(0), -1) == 3.0
    with pytest.raises(ValueError):
        custom_boundary([-1.0], [1.0])
