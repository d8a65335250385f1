"""Basic coupling of boundary and curve models on one bulk environment.

All models of a run are swept together, so they read literally the same bulk
weights. Curve models enter through their derived boundary: an outside-only
curve sweep produces L^h on the two axes, and the quadrant is then handled by
the fused boundary sweep. The checks below evaluate, sample by sample, the
pathwise inequalities that drive the convergence argument.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .environment import Environment, Stream, TiltParameters, lattice_floor
from .lpp import Segment, boundary_fields, curve_field
from .profiles import (BoundaryProfile, CurveProfile, curve_from_spec,
                       default_window, derived_boundary_from_curve,
                       stationary_boundary, tilted_pair_from_half)
from .scaling import CONSTANTS, window_indices

# Coupled models that agree mathematically can still differ by rounding once
# geodesics coalesce, since the two sums are accumulated in different orders.
ROUNDING_TOL = 1e-10


def _tol(*arrays) -> float:
    scale = max([1.0] + [float(np.max(np.abs(a))) for a in arrays if np.size(a)])
    return ROUNDING_TOL * scale


# ---------------------------------------------------------------- runs

@dataclass
class CoupledRun:
    seed: int
    n: int
    t: float
    a: float
    alpha: float | None
    tilt: TiltParameters | None
    names: list
    specs: list
    fields: list = field(repr=False)
    curve_fields: dict = field(default_factory=dict, repr=False)
    bulk_seeds: list = field(default_factory=list)
    window: int | None = None
    fault: str | None = None

    def __getitem__(self, name):
        try:
            return self.fields[self.names.index(name)]
        except ValueError:
            raise KeyError(f"no model named {name!r}; have {self.names}") from None

    @property
    def T(self) -> int:
        return self.fields[0].T

    @property
    def i_range(self):
        return self.fields[0].i_range


def _model_name(spec) -> str:
    if isinstance(spec, dict):
        if "name" in spec:
            return str(spec["name"])
        if "curve" in spec:
            return "h:" + str(spec["curve"].get("kind"))
        kind = spec.get("kind")
        if kind == "stationary":
            return f"stationary({spec.get('rho', 0.5)})"
        return str(kind)
    if isinstance(spec, CurveProfile):
        return "h:" + str(spec.label)
    if isinstance(spec, BoundaryProfile):
        return spec.kind if spec.rho is None else f"{spec.kind}({spec.rho})"
    raise TypeError(f"cannot name model {spec!r}")


def _resolve(spec, tilt, window, seed):
    """Profile object for a spec dict, or the object itself."""
    if isinstance(spec, (BoundaryProfile, CurveProfile)):
        return spec
    if not isinstance(spec, dict):
        raise TypeError(f"unsupported model spec {spec!r}")
    if "curve" in spec:
        return curve_from_spec(spec["curve"], window, seed)
    kind = spec.get("kind")
    if kind == "half":
        return stationary_boundary(0.5)
    if kind == "stationary":
        return stationary_boundary(float(spec.get("rho", 0.5)))
    if kind in ("tilted_plus", "tilted_minus"):
        if tilt is None:
            raise ValueError("tilted models need tilt parameters (pass alpha)")
        pair = tilted_pair_from_half(tilt)
        return pair.plus if kind == "tilted_plus" else pair.minus
    raise ValueError(f"unknown model kind {kind!r}")


def _needs_tilt(specs) -> bool:
    return any(isinstance(s, dict) and s.get("kind") in
               ("tilted_plus", "tilted_minus") for s in specs)


def basic_couple(seed: int, profiles, n: int, t: float, a: float,
                 alpha: float | None = None, *, tilt: TiltParameters | None = None,
                 i_range=None, storage: str = "frontier", window: int | None = None,
                 fault: str | None = None, backend=None) -> CoupledRun:
    """Fields L^b[i]_{tn}, i in ``i_range``, for every model on one environment.

    ``i_range`` defaults to the lattice indices of K_a. ``fault="decouple"``
    moves the last model onto the environment of ``seed + 1``; it exists so
    tests can confirm that the pathwise checks notice broken coupling.
    """
    if fault not in (None, "decouple"):
        raise ValueError(f"unknown fault {fault!r}")
    T = lattice_floor(t * n)
    lo, hi = window_indices(n, a) if i_range is None else i_range
    if lo < -T or hi > T:
        raise ValueError(f"indices [{lo}, {hi}] leave the quadrant at T={T}")
    target = Segment.antidiagonal(T, lo, hi)
    if tilt is None and _needs_tilt(profiles):
        if alpha is None:
            raise ValueError("tilted models need alpha")
        tilt = TiltParameters.from_scaling(n, t, a, alpha)
    if window is None:
        window = default_window(target.level, max(abs(lo), abs(hi)))

    names = [_model_name(p) for p in profiles]
    if len(set(names)) != len(names):
        raise ValueError(f"model names must be distinct: {names}")
    objs = [_resolve(p, tilt, window, seed) for p in profiles]

    env_seeds = [seed] * len(objs)
    if fault == "decouple":
        env_seeds[-1] = seed + 1

    fields: list = [None] * len(objs)
    curve_fields = {}
    for es in sorted(set(env_seeds)):
        env = Environment(es)
        members = [m for m, s in enumerate(env_seeds) if s == es]
        boundaries = []
        for m in members:
            obj = objs[m]
            if isinstance(obj, CurveProfile):
                cf = curve_field(env, obj, target, outside_only=True,
                                 backend=backend)
                if cf.window_clipped:
                    raise ValueError(
                        f"curve window {window} too narrow for model {names[m]}")
                curve_fields[names[m]] = cf
                obj = derived_boundary_from_curve(cf)
            boundaries.append(obj)
        out = boundary_fields(env, boundaries, target, storage, backend)
        for m, f in zip(members, out):
            fields[m] = f
    return CoupledRun(seed=seed, n=n, t=t, a=a, alpha=alpha, tilt=tilt,
                      names=names, specs=list(profiles), fields=fields,
                      curve_fields=curve_fields, bulk_seeds=env_seeds,
                      window=window, fault=fault)


def verify_shared_bulk(run: CoupledRun, samples: int = 64,
                       check_seed: int = 0) -> int:
    """Number of models whose fields disagree with the run's bulk weights.

    Full-storage runs are re-evaluated at random bulk sites: the stored value
    must equal weight + max(parents) bit for bit. Frontier runs can only be
    checked through the recorded environment of each model.
    """
    bad = 0
    env = Environment(run.seed)
    rng = np.random.default_rng(check_seed)
    for name, f, es in zip(run.names, run.fields, run.bulk_seeds):
        if f.storage != "full":
            bad += es != run.seed
            continue
        k, l, _, _ = f.sites()
        bulk = np.flatnonzero((k >= 1) & (l >= 1))
        if bulk.size == 0:
            continue
        picks = rng.choice(bulk, size=min(samples, bulk.size), replace=False)
        for p in picks:
            kk, ll = int(k[p]), int(l[p])
            west = f.value(kk - 1, ll) if f.covers(kk - 1, ll) else -math.inf
            south = f.value(kk, ll - 1) if f.covers(kk, ll - 1) else -math.inf
            w = env.exp1(kk, ll, Stream.BULK)
            if w + max(west, south) != f.value(kk, ll):
                bad += 1
                break
    return bad


# ---------------------------------------------------------------- lemmas

def _hypothesis(f1, f2, i, j, literal):
    # the crossing argument needs Z1[j] <= Z2[i]; the swapped form
    # Z1[i] <= Z2[j] is kept only to show that it does not suffice
    if literal:
        return f1.label_at(i) <= f2.label_at(j)
    return f1.label_at(j) <= f2.label_at(i)


def check_comparison_lemma(run: CoupledRun, i: int, j: int, model1,
                           model2, literal: bool = False) -> bool:
    """False only if Z1[j] <= Z2[i] holds and the increment bound fails."""
    if i > j:
        raise ValueError("need i <= j")
    f1, f2 = run[model1], run[model2]
    if not _hypothesis(f1, f2, i, j, literal):
        return True
    lhs = f1.at(j) - f1.at(i)
    rhs = f2.at(j) - f2.at(i)
    return bool(lhs <= rhs + _tol(f1.at(j), f2.at(j)))


@dataclass
class ComparisonCounts:
    pairs: int
    applicable: int
    violations: int


def comparison_lemma_counts(run: CoupledRun, model1, model2,
                            pairs=None, literal: bool = False) -> ComparisonCounts:
    """Pathwise check over all i <= j in the run's range, or the given pairs."""
    f1, f2 = run[model1], run[model2]
    lo, hi = f1.i_range
    if pairs is None:
        idx = np.arange(lo, hi + 1)
        I, J = np.meshgrid(idx, idx, indexing="ij")
        keep = I <= J
        I, J = I[keep], J[keep]
    else:
        pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        I, J = pairs[:, 0], pairs[:, 1]
        if np.any(I > J):
            raise ValueError("pairs must satisfy i <= j")
    hyp = _hypothesis(f1, f2, I, J, literal)
    lhs = f1.at(J) - f1.at(I)
    rhs = f2.at(J) - f2.at(I)
    bad = hyp & (lhs > rhs + _tol(f1.top_values, f2.top_values))
    return ComparisonCounts(int(I.size), int(hyp.sum()), int(bad.sum()))


def _cumulative_line(f):
    """b(z) for z = -ny..nx as one array, with the offset of z = 0."""
    return np.concatenate([f.axis_y[:0:-1], f.axis_x]), f.axis_y.size - 1


def increment_ordered(low, high, tol: float | None = None):
    """Violations of b_low(j) - b_low(i) <= b_high(j) - b_high(i), i <= j.

    Equivalent to b_high - b_low being nondecreasing in z; returned as the
    number of z where the difference drops by more than ``tol``.
    """
    diff = np.asarray(high) - np.asarray(low)
    if tol is None:
        tol = _tol(low, high)
    return int(np.sum(np.diff(diff) < -tol))


@dataclass
class AttractReport:
    status: str  # "ok", "violated" or "precondition_failed"
    precondition_violations: int
    attract_violations: int | None
    increase_violations: int | None
    pairs: int

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def check_attract_increase(run: CoupledRun, model_low, model_high) -> AttractReport:
    """Increment domination for i <= j and both monotone-difference chains.

    The boundaries must be increment ordered; if they are not, the report
    says so and no conclusion is evaluated.
    """
    f1, f2 = run[model_low], run[model_high]
    b1, _ = _cumulative_line(f1)
    b2, _ = _cumulative_line(f2)
    pre = increment_ordered(b1, b2)
    lo, hi = f1.i_range
    idx = np.arange(lo, hi + 1)
    if pre:
        return AttractReport("precondition_failed", pre, None, None, 0)
    tol = _tol(f1.top_values, f2.top_values)
    gap = f2.at(idx) - f1.at(idx)  # L2[i] - L1[i]
    I, J = np.meshgrid(np.arange(idx.size), np.arange(idx.size), indexing="ij")
    upper = I <= J
    attract = int(np.sum(upper & (gap[J] - gap[I] < -tol)))

    increase = 0
    if lo <= 0 <= hi:
        rel = gap - gap[-lo]  # (L2[i]-L2[0]) - (L1[i]-L1[0])
        ii, jj = idx[I], idx[J]
        right = upper & (ii >= 0)
        bad_r = (rel[I] < -tol) | (rel[I] > rel[J] + tol)
        left = (J <= I) & (ii <= 0)
        bad_l = (-rel[I] < -tol) | (-rel[I] > -rel[J] + tol)
        increase = int(np.sum(right & bad_r) + np.sum(left & bad_l & (jj <= 0)))
    status = "ok" if attract == 0 and increase == 0 else "violated"
    return AttractReport(status, 0, attract, increase, int(upper.sum()))


def tilt_ordering_violations(run: CoupledRun, minus="tilted_minus",
                             half="half", plus="tilted_plus") -> int:
    """Violations of b- <= b^{1/2} <= b+ in the increment order."""
    bm, _ = _cumulative_line(run[minus])
    bh, _ = _cumulative_line(run[half])
    bp, _ = _cumulative_line(run[plus])
    return increment_ordered(bm, bh) + increment_ordered(bh, bp)


def exit_monotonicity_violations(run: CoupledRun) -> int:
    """Sum over models of strict decreases of Z[i] in i."""
    return int(sum(np.sum(np.diff(f.top_labels) < 0) for f in run.fields))


# ---------------------------------------------------------------- sandwich

def event_E(run: CoupledRun, h, plus="tilted_plus", minus="tilted_minus") -> bool:
    """Z+[-a n^{2/3}] >= Z^h[a n^{2/3}] and Z-[a n^{2/3}] <= Z^h[-a n^{2/3}]."""
    lo, hi = window_indices(run.n, run.a)
    fh, fp, fm = run[h], run[plus], run[minus]
    return bool(fp.label_at(lo) >= fh.label_at(hi)
                and fm.label_at(hi) <= fh.label_at(lo))


@dataclass
class SandwichReport:
    event_E: bool
    supnorm_h_vs_half: float
    I_n: float
    attract_coupling_violations: int
    sandwich_violations: int | None
    supnorm_violation: bool | None

    @property
    def ok(self) -> bool:
        return (self.I_n >= -ROUNDING_TOL and self.attract_coupling_violations == 0
                and not self.sandwich_violations and not self.supnorm_violation)

    def to_dict(self):
        return asdict(self)


def _delta(f, n, idx):
    norm = CONSTANTS["increment_normalizer"] * float(n) ** (1.0 / 3.0)
    return (f.at(idx) - f.at(0)) / norm


def sandwich_supnorm(run: CoupledRun, h, half="half", plus="tilted_plus",
                     minus="tilted_minus", a: float | None = None) -> SandwichReport:
    """Sup-norm of Delta^h - Delta^{1/2} over K_a with the tilt sandwich.

    The ordering of Delta^- , Delta^{1/2}, Delta^+ holds on every sample; the
    bound |Delta^h - Delta^{1/2}| <= Delta^+ - Delta^- (mirrored for u < 0)
    and sup <= I_n are asserted only on the event E and reported as None off
    it.
    """
    a = run.a if a is None else a
    lo, hi = window_indices(run.n, a)
    idx = np.arange(lo, hi + 1)
    dh = _delta(run[h], run.n, idx)
    d0 = _delta(run[half], run.n, idx)
    dp = _delta(run[plus], run.n, idx)
    dm = _delta(run[minus], run.n, idx)
    tol = _tol(run[plus].top_values) / (CONSTANTS["increment_normalizer"]
                                        * float(run.n) ** (1.0 / 3.0))
    right = idx >= 0
    left = idx <= 0
    coup = int(np.sum(right & ((dm > d0 + tol) | (d0 > dp + tol)))
               + np.sum(left & ((dp > d0 + tol) | (d0 > dm + tol))))
    i_n = float((dp[-1] - dm[-1]) + (dm[0] - dp[0]))
    sup = float(np.max(np.abs(dh - d0)))
    on_e = event_E(run, h, plus, minus) if a == run.a else None
    if on_e:
        width = np.where(right, dp - dm, dm - dp)
        sand = int(np.sum(np.abs(dh - d0) > width + 2 * tol))
        supv = bool(sup > i_n + 4 * tol)
    else:
        sand, supv = None, None
    return SandwichReport(bool(on_e), sup, i_n, coup, sand, supv)


def in_mean_bound(n: int, t: float, a: float, alpha: float) -> float:
    """Right side of 2^{3/2} n^{1/3} E(I_n) <= 3 a n^{2/3} 18 delta^{-alpha} (tn)^{-1/3}."""
    delta = a * t ** (-2.0 / 3.0)
    return 3 * a * n ** (2.0 / 3.0) * 18 * delta ** (-alpha) / (t * n) ** (1.0 / 3.0)


def envelope(a: float, t: float, alpha: float, eta: float, c2: float = 1.0) -> float:
    """Shape-only bound 2 c2 delta^{3 alpha} + 22 a^{1/2} delta^{1/2-alpha} / eta."""
    delta = a * t ** (-2.0 / 3.0)
    return 2 * c2 * delta ** (3 * alpha) + 22 * math.sqrt(a) * delta ** (0.5 - alpha) / eta


def increment_gap(run: CoupledRun, plus="tilted_plus", minus="tilted_minus") -> np.ndarray:
    """zeta^+ - zeta^- along the run's anti-diagonal range."""
    return np.diff(run[plus].top_values) - np.diff(run[minus].top_values)


# ---------------------------------------------------------------- fan-out

def seed_map(fn, items, workers: int = 1):
    """Ordered map; results do not depend on ``workers``."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


# ---------------------------------------------------------------- experiment

@dataclass(frozen=True)
class ConvergenceTask:
    seed: int
    curve: dict
    n: int
    t: float
    a: float
    alpha: float
    window: int | None = None


def convergence_sample(task: ConvergenceTask) -> dict:
    """One coupled quadruple {h, 1/2, +, -} and its sandwich statistics."""
    models = [{"curve": task.curve, "name": "h"}, {"kind": "half"},
              {"kind": "tilted_plus"}, {"kind": "tilted_minus"}]
    run = basic_couple(task.seed, models, task.n, task.t, task.a, task.alpha,
                       window=task.window)
    rep = sandwich_supnorm(run, "h")
    att = check_attract_increase(run, "tilted_minus", "tilted_plus")
    out = rep.to_dict()
    out.update(seed=task.seed, t=task.t, a=task.a,
               I_n_raw=rep.I_n * CONSTANTS["increment_normalizer"]
               * float(task.n) ** (1.0 / 3.0),
               attract_status=att.status,
               exit_violations=exit_monotonicity_violations(run),
               tilt_violations=tilt_ordering_violations(run))
    return out


def convergence_experiment(curve: dict, n: int, t_ladder, a: float,
                           alpha: float, eta: float, seeds, *, corollary=False,
                           c2: float = 1.0, workers: int = 1) -> dict:
    """Empirical tails P(||Delta^h - Delta^{1/2}||_{K_a} > eta) along t.

    With ``corollary`` the window grows as a_t = sqrt(t) and sup-norms are
    scaled by a_t^{-1/2} before comparing with eta.
    """
    from .stats import supnorm_tail

    t_ladder = [float(t) for t in t_ladder]
    if len(t_ladder) < 3:
        raise ValueError("the t-ladder needs at least 3 points")
    seeds = list(seeds)
    per_t = []
    for t in t_ladder:
        a_t = math.sqrt(t) if corollary else a
        tasks = [ConvergenceTask(int(s), dict(curve), n, t, a_t, alpha)
                 for s in seeds]
        rows = seed_map(convergence_sample, tasks, workers)
        rows.sort(key=lambda r: r["seed"])
        scale = a_t ** -0.5 if corollary else 1.0
        sup = np.array([r["supnorm_h_vs_half"] for r in rows]) * scale
        i_raw = np.array([r["I_n_raw"] for r in rows])
        per_t.append(dict(
            t=t, a=a_t, samples=rows, supnorms=sup,
            envelope=envelope(a_t, t, alpha, eta, c2),
            e_frequency=float(np.mean([r["event_E"] for r in rows])),
            I_n_raw_mean=float(i_raw.mean()),
            I_n_bound=in_mean_bound(n, t, a_t, alpha),
            violations=int(sum((r["sandwich_violations"] or 0)
                               + bool(r["supnorm_violation"])
                               + r["attract_coupling_violations"]
                               + r["exit_violations"] + r["tilt_violations"]
                               + (r["attract_status"] != "ok") for r in rows))))
    tail = supnorm_tail([p["supnorms"] for p in per_t], eta, t_ladder,
                        envelope=[p["envelope"] for p in per_t])
    return dict(curve=curve, n=n, a=a, alpha=alpha, eta=eta,
                corollary=corollary, t_ladder=t_ladder, per_t=per_t, tail=tail)
