"""The exact pathwise suite: every check here must report zero violations."""
from __future__ import annotations

import numpy as np

from .coupling import (basic_couple, check_attract_increase,
                       comparison_lemma_counts, exit_monotonicity_violations,
                       sandwich_supnorm, tilt_ordering_violations)
from .environment import Environment, lattice_floor
from .lpp import (Segment, lpp_bruteforce, lpp_from_curve,
                  lpp_point_to_point, box_boundary_field)
from .profiles import CurveProfile, stationary_boundary
from .scaling import h_process, height_grid, height_identity_residual
from .tasep import evolution_violations, talpp_violations
from .lpp import curve_field

ORACLE_TOL = 1e-9


def _rng(seed, salt):
    return np.random.default_rng([int(seed), salt])


def oracle_suite(instances: int = 1000, base_seed: int = 0) -> dict:
    """DP against exhaustive enumeration, ``instances`` per mode."""
    out = {}
    bad = worst = 0
    for s in range(base_seed, base_seed + instances):
        env = Environment(s)
        r = _rng(s, 1)
        kk, ll = (int(v) for v in r.integers(1, 7, size=2))
        exact = lpp_bruteforce(env, "point", 6, target=(kk, ll)).value
        got = lpp_point_to_point(env, (1, 1), (kk, ll))
        worst = max(worst, abs(got - exact))
        bad += abs(got - exact) > ORACLE_TOL
    out["point"] = dict(instances=instances, mismatches=int(bad),
                        max_abs_error=float(worst))

    bad = worst = 0
    for s in range(base_seed, base_seed + instances):
        env = Environment(s)
        r = _rng(s, 2)
        rho = float(r.uniform(0.2, 0.8))
        kk, ll = (int(v) for v in r.integers(1, 6, size=2))
        b = stationary_boundary(rho)
        exact = lpp_bruteforce(env, "boundary", 5, target=(kk, ll), boundary=b)
        f = box_boundary_field(env, b, 5, 5)
        got, lab = f.value(kk, ll), f.label(kk, ll)
        worst = max(worst, abs(got - exact.value))
        bad += abs(got - exact.value) > ORACLE_TOL or lab != exact.label
    out["boundary"] = dict(instances=instances, mismatches=int(bad),
                           max_abs_error=float(worst))

    bad = worst = 0
    done = tried = 0
    s = base_seed
    while done < instances:
        env = Environment(s)
        r = _rng(s, 3)
        kind = ("flat", "stationary", "narrow_wedge")[s % 3]
        prof = {"flat": CurveProfile.flat(12),
                "narrow_wedge": CurveProfile.narrow_wedge(12),
                "stationary": CurveProfile.stationary(12, s)}[kind]
        j = int(r.integers(-3, 4))
        d = int(prof.height(j)) + 2 * int(r.integers(1, 4))
        target = ((d + j) // 2, (d - j) // 2)
        s += 1
        tried += 1
        try:
            exact = lpp_bruteforce(env, "curve", 6, target=target, profile=prof)
        except ValueError:
            continue  # corners spread beyond the 6x6 box
        f = lpp_from_curve(env, prof, Segment.point(*target))
        got, lab = float(f.top_values[0]), int(f.top_labels[0])
        worst = max(worst, abs(got - exact.value))
        bad += abs(got - exact.value) > ORACLE_TOL or lab != exact.label
        done += 1
    out["curve"] = dict(instances=done, mismatches=int(bad),
                        max_abs_error=float(worst), skipped=tried - done)
    out["violations"] = sum(v["mismatches"] for v in out.values())
    return out


LEMMA_MODELS = [{"kind": "half"}, {"kind": "tilted_plus"},
                {"kind": "tilted_minus"}, {"kind": "stationary", "rho": 0.4},
                {"kind": "stationary", "rho": 0.6},
                {"curve": {"kind": "flat"}},
                {"curve": {"kind": "stationary"}}]
ORDERED_PAIRS = [("tilted_minus", "half"), ("half", "tilted_plus"),
                 ("tilted_minus", "tilted_plus"),
                 ("stationary(0.4)", "stationary(0.6)"),
                 ("stationary(0.4)", "half"), ("half", "stationary(0.6)")]


def lemma_run(seed: int, n: int, t: float = 1.0, a: float = 1.0,
              alpha: float = 0.25, fault: str | None = None) -> dict:
    """All exact checks on one coupled run over the full anti-diagonal."""
    T = lattice_floor(t * n)
    run = basic_couple(seed, LEMMA_MODELS, n, t, a, alpha, i_range=(-T, T),
                       fault=fault)
    c = dict(comparison=0, comparison_applicable=0, attract=0, increase=0,
             precondition_unexpected=0, guard_failures=0, exit_monotone=0,
             tilt_order=0, attract_coupling=0, sandwich=0, supnorm_bound=0,
             I_n_negative=0, on_E=0)
    names = run.names
    for m1 in names:
        for m2 in names:
            if m1 == m2:
                continue
            cc = comparison_lemma_counts(run, m1, m2)
            c["comparison"] += cc.violations
            c["comparison_applicable"] += cc.applicable
    for lo, hi in ORDERED_PAIRS:
        rep = check_attract_increase(run, lo, hi)
        if rep.status == "precondition_failed":
            c["precondition_unexpected"] += 1
        else:
            c["attract"] += rep.attract_violations
            c["increase"] += rep.increase_violations
    # reversed tilt: the guard must refuse to assert any conclusion
    guard = check_attract_increase(run, "tilted_plus", "tilted_minus")
    c["guard_failures"] += guard.status != "precondition_failed"
    c["exit_monotone"] += exit_monotonicity_violations(run)
    c["tilt_order"] += tilt_ordering_violations(run)
    for h in ("h:flat", "h:stationary"):
        sw = sandwich_supnorm(run, h)
        c["attract_coupling"] += sw.attract_coupling_violations
        c["I_n_negative"] += sw.I_n < 0
        if sw.event_E:
            c["on_E"] += 1
            c["sandwich"] += sw.sandwich_violations
            c["supnorm_bound"] += int(sw.supnorm_violation)
    return c


_COUNTED = ("comparison", "attract", "increase", "precondition_unexpected",
            "guard_failures", "exit_monotone", "tilt_order",
            "attract_coupling", "sandwich", "supnorm_bound", "I_n_negative")


def lemma_suite(n_list=(50, 200), seeds=range(200), t: float = 1.0,
                a: float = 1.0, alpha: float = 0.25, fault=None) -> dict:
    out = {}
    for n in n_list:
        tot: dict = {}
        count = 0
        for s in seeds:
            for k, v in lemma_run(int(s), int(n), t, a, alpha, fault).items():
                tot[k] = tot.get(k, 0) + int(v)
            count += 1
        tot["seeds"] = count
        out[str(n)] = tot
    out["violations"] = int(sum(v[k] for v in out.values() if isinstance(v, dict)
                                for k in _COUNTED))
    return out


def talpp_suite(seeds=range(100), side: int = 50, times=(0.0, 1.0, 3.0, 6.0, 10.0)) -> dict:
    """Biconditional and local-minimum flips on side x side windows."""
    bad = evo = checked = 0
    for s in seeds:
        env = Environment(int(s))
        for prof in (CurveProfile.flat(2 * side), CurveProfile.stationary(2 * side, int(s)),
                     CurveProfile.narrow_wedge(2 * side)):
            # columns [-side/2, side/2] covered up to level 2 side
            D = 2 * side
            seg = Segment(D, D // 2 - side // 2, D // 2 + side // 2)
            f = curve_field(env, prof, seg, storage="full")
            for t in times:
                bad += talpp_violations(f, t)
                checked += 1
            evo += evolution_violations(f, max(times))
    return dict(checks=checked, talpp=bad, evolution=evo, violations=bad + evo)


def identity_suite(seeds=range(20), n: int = 200, t: float = 1.0, a: float = 1.0) -> dict:
    """H/Delta identity on the H grid, up to floating-point rounding."""
    worst = 0.0
    bad = 0
    for s in seeds:
        T = lattice_floor(t * n)
        f = lpp_from_curve(Environment(int(s)), CurveProfile.flat(3 * T),
                           (T, -T // 2, T // 2))
        hp = h_process(f, n, t, height_grid(n, a))
        res = np.abs(height_identity_residual(hp, f, n, t))
        scale = max(1.0, float(np.max(np.abs(hp.values))))
        worst = max(worst, float(res.max()))
        bad += int(np.sum(res > 1e-12 * scale))
    return dict(max_residual=worst, violations=bad)


def run_verify(n_list=(50, 200), seeds: int = 200, base_seed: int = 0,
               oracle_instances: int = 1000, t: float = 1.0, a: float = 1.0,
               alpha: float = 0.25, fault=None) -> dict:
    seed_range = range(base_seed, base_seed + seeds)
    rep = dict(oracle=oracle_suite(oracle_instances, base_seed),
               lemmas=lemma_suite(n_list, seed_range, t, a, alpha, fault),
               talpp=talpp_suite(range(base_seed, base_seed + min(seeds, 100))),
               identity=identity_suite(range(base_seed, base_seed + min(seeds, 20))))
    rep["violations"] = int(sum(v["violations"] for v in rep.values()))
    rep["passed"] = rep["violations"] == 0
    return rep
