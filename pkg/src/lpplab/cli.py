"""Command-line entry point: ``lpplab <command> [--config file] [flags]``.

Exit codes: 0 pass, 1 violation of an exact check, 2 usage or
configuration error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields
from functools import partial
from pathlib import Path

import numpy as np

from . import io as lio
from .coupling import (basic_couple, convergence_experiment, seed_map)
from .environment import lattice_floor
from .lpp import Segment, curve_field, exit_points
from .profiles import curve_from_spec, default_window
from .scaling import (CONSTANTS, default_grid, delta_process, h_process,
                      height_grid, window_indices)
from .stats import exit_localization_curves, ks_two_sample, loglog_slope

COMMANDS = ("simulate", "verify", "converge", "exitpoints", "tasep-check")
EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    command: str
    profile: dict = field(default_factory=lambda: {"kind": "flat"})
    n: int = 500
    t: float = 1.0
    t_ladder: list = field(default_factory=lambda: [1.0, 4.0, 16.0, 64.0])
    a: float = 1.0
    alpha: float = 0.25
    eta: float = 0.25
    grid_step: float | None = None
    seeds: int = 1000
    base_seed: int = 0
    workers: int = 1
    out: str = "lpplab-out"
    rho: float = 0.5
    r_grid: list = field(default_factory=lambda: [0.5, 1.0, 1.5, 2.0, 2.5,
                                                  3.0, 3.5, 4.0])
    c2: float = 1.0
    corollary: bool = False
    n_list: list = field(default_factory=lambda: [50, 200])
    oracle_instances: int = 1000
    tasep_t: float = 12.0
    tasep_ladder: list = field(default_factory=lambda: [0.0, 2.0, 5.0, 10.0])
    fault: str | None = None

    def as_dict(self) -> dict:
        return asdict(self)

    @property
    def is_curve(self) -> bool:
        return self.profile.get("kind") not in ("stationary", "half")

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.seeds <= 0:
            raise ConfigError("seeds must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if not 0 < self.alpha < 0.5:
            raise ConfigError("alpha must lie in (0, 1/2)")
        if self.n < 1:
            raise ConfigError("n must be positive")
        cube = self.n ** (1.0 / 3.0)
        if self.command in ("simulate", "converge", "verify") and \
                not 0 < self.a < cube:
            raise ConfigError(f"a must lie in (0, n^(1/3)) = (0, {cube:.6g})")
        if self.fault not in (None, "decouple"):
            raise ConfigError(f"unknown fault {self.fault!r}")
        if self.command == "converge":
            if len(self.t_ladder) < 3:
                raise ConfigError("the t-ladder needs at least 3 points")
            if self.eta <= 0:
                raise ConfigError("eta must be positive")
            for t in self.t_ladder:
                a_t = math.sqrt(t) if self.corollary else self.a
                if t < a_t ** 1.5:
                    raise ConfigError(f"tilts need t >= a^(3/2); t={t}, a={a_t}")
                if self.corollary and not a_t < cube:
                    raise ConfigError(f"a_t = sqrt({t}) leaves (0, n^(1/3))")
        if self.command == "verify" and self.t < self.a ** 1.5:
            raise ConfigError("tilts need t >= a^(3/2)")
        if self.command == "exitpoints" and not 0 < self.rho < 1:
            raise ConfigError("rho must lie in (0, 1)")
        return self


def _seed_list(cfg):
    return list(range(cfg.base_seed, cfg.base_seed + cfg.seeds))


def _model_spec(cfg):
    p = dict(cfg.profile)
    return {"curve": p, "name": "h"} if cfg.is_curve else dict(p, name="h")


# ---------------------------------------------------------------- simulate

def _simulate_seed(seed, cfg):
    reach = window_indices(cfg.n, CONSTANTS["height_space_factor"] * cfg.a)
    run = basic_couple(seed, [_model_spec(cfg)], cfg.n, cfg.t, cfg.a,
                       i_range=reach)
    f = run["h"]
    dp = delta_process(f, cfg.n, cfg.t, cfg.a, cfg.grid_step)
    hp = h_process(f, cfg.n, cfg.t, height_grid(cfg.n, cfg.a))
    lo, hi = f.i_range
    T = f.T
    field_rows = [(seed, i, T + i, T - i, float(f.at(i)), int(f.label_at(i)),
                   int(f.aux_at(i))) for i in range(lo, hi + 1)]
    return dict(seed=seed, field=field_rows,
                delta=[(seed, float(x), float(v)) for x, v in zip(dp.grid, dp.values)],
                height=[(seed, float(x), float(v)) for x, v in zip(hp.grid, hp.values)],
                exit0=int(f.label_at(0)), L0=float(f.at(0)))


def run_simulate(cfg) -> int:
    out = Path(cfg.out)
    res = seed_map(partial(_simulate_seed, cfg=cfg), _seed_list(cfg), cfg.workers)
    meta = lio.meta_block(cfg.as_dict(), seeds=_seed_list(cfg)[:1] + [cfg.seeds])
    lio.write_csv(out / "simulate_field.csv",
                  ["seed", "i", "k", "l", "L", "exit_label", "corner_label"],
                  [r for x in res for r in x["field"]], meta)
    lio.write_csv(out / "simulate_delta.csv", ["seed", "x", "delta"],
                  [r for x in res for r in x["delta"]], meta)
    lio.write_csv(out / "simulate_height.csv", ["seed", "x", "H"],
                  [r for x in res for r in x["height"]], meta)
    summary = dict(seeds=cfg.seeds, mean_L0=float(np.mean([x["L0"] for x in res])),
                   exit_at_0=[x["exit0"] for x in res])
    lio.write_json(out / "simulate_summary.json", summary, meta)
    return EXIT_OK


# ---------------------------------------------------------------- verify

def run_verify(cfg) -> int:
    from .verify import run_verify as suite
    rep = suite(n_list=tuple(cfg.n_list), seeds=cfg.seeds, base_seed=cfg.base_seed,
                oracle_instances=cfg.oracle_instances, t=cfg.t, a=cfg.a,
                alpha=cfg.alpha, fault=cfg.fault)
    lio.write_json(Path(cfg.out) / "verify_report.json", rep,
                   lio.meta_block(cfg.as_dict()))
    print(f"verify: {rep['violations']} violations")
    return EXIT_OK if rep["passed"] else EXIT_VIOLATION


# ---------------------------------------------------------------- converge

def run_converge(cfg) -> int:
    if not cfg.is_curve:
        raise ConfigError("converge needs a curve profile")
    rep = convergence_experiment(cfg.profile, cfg.n, cfg.t_ladder, cfg.a,
                                 cfg.alpha, cfg.eta, _seed_list(cfg),
                                 corollary=cfg.corollary, c2=cfg.c2,
                                 workers=cfg.workers)
    rows = []
    for p in rep["per_t"]:
        for r, sup in zip(p["samples"], p["supnorms"]):
            rows.append((p["t"], r["seed"], float(sup), r["I_n"],
                         int(r["event_E"]), r["sandwich_violations"]
                         if r["sandwich_violations"] is not None else ""))
    meta = lio.meta_block(cfg.as_dict())
    out = Path(cfg.out)
    lio.write_csv(out / "converge_samples.csv",
                  ["t", "seed", "supnorm", "I_n", "event_E", "sandwich_violations"],
                  rows, meta)
    summary = dict(
        tail=rep["tail"], corollary=cfg.corollary,
        envelope_note="shape only: constants c1, c2 are user supplied",
        per_t=[{k: v for k, v in p.items() if k not in ("samples", "supnorms")}
               for p in rep["per_t"]])
    lio.write_json(out / "converge_report.json", summary, meta)
    bad = sum(p["violations"] for p in rep["per_t"])
    print(f"converge: monotone trend {rep['tail'].monotone_trend}, "
          f"{bad} violations")
    return EXIT_OK if bad == 0 else EXIT_VIOLATION


# ---------------------------------------------------------------- exitpoints

def _exit_seed(seed, cfg):
    n = cfg.n
    if cfg.is_curve:
        win = default_window(2 * n, 0)
        prof = curve_from_spec(cfg.profile, win, seed)
        from .environment import Environment
        f = curve_field(Environment(seed), prof, Segment.antidiagonal(n, 0, 0))
        return seed, int(f.top_labels[0])
    run = basic_couple(seed, [_model_spec(cfg)], n, 1.0, 1.0, i_range=(0, 0))
    return seed, exit_points(run["h"], n, (0, 0))[0].label


def run_exitpoints(cfg) -> int:
    res = sorted(seed_map(partial(_exit_seed, cfg=cfg), _seed_list(cfg),
                          cfg.workers))
    labels = np.array([z for _, z in res])
    n = cfg.n
    report = dict(n=n, seeds=cfg.seeds, mean_label=float(labels.mean()),
                  mean_ratio=float(labels.mean() / n))
    if cfg.is_curve:
        centre = 0.0
        tail = exit_localization_curves(labels, n, cfg.r_grid, 0.0, label="K")
    else:
        rho = float(cfg.profile.get("rho", cfg.rho))
        d_rho = ((1 - rho) / rho) ** 2
        centre = (1 - d_rho) * n
        report.update(rho=rho, characteristic_target=1 - d_rho)
        tail = exit_localization_curves(labels, n, cfg.r_grid, centre,
                                        c2=cfg.c2, label="Z")
    slope, used = loglog_slope(tail, 1.0, 4.0)
    report.update(tail=tail, loglog_slope=slope, slope_points=used, centre=centre)
    meta = lio.meta_block(cfg.as_dict())
    out = Path(cfg.out)
    lio.write_csv(out / "exitpoints.csv", ["seed", "label"], res, meta)
    lio.write_json(out / "exitpoints_report.json", report, meta)
    print(f"exitpoints: mean label / n = {report['mean_ratio']:.4f}")
    return EXIT_OK


# ---------------------------------------------------------------- tasep

def _direct_h0(seed, t):
    from .profiles import ParticleConfig
    from .tasep import direct_tasep
    w = int(math.ceil(2 * t)) + 8
    return int(direct_tasep(ParticleConfig.step(w), t, seed,
                            observe=2).snapshots[t](0))


def _lpp_h0(seed, t):
    from .environment import Environment
    from .profiles import CurveProfile
    from .tasep import height_from_occupation
    top = int(math.ceil(t)) + 8
    while True:
        f = curve_field(Environment(seed), CurveProfile.narrow_wedge(2 * top + 4),
                        Segment(2 * top, top, top), storage="full")
        try:
            return int(height_from_occupation(f, t, (0, 0)).values[0])
        except ValueError:
            top *= 2


def tasep_compare(t: float, seeds: int, base_seed: int = 0, workers: int = 1):
    """Two-sample test of h(0, t): direct TASEP against LPP reconstruction.

    The samples use disjoint seed ranges, so the two sides share nothing.
    """
    d = seed_map(partial(_direct_h0, t=t), range(base_seed, base_seed + seeds),
                 workers)
    off = base_seed + 10 ** 9
    lp = seed_map(partial(_lpp_h0, t=t), range(off, off + seeds), workers)
    return ks_two_sample(d, lp, name="tasep_vs_lpp_h0"), d, lp


def run_tasep_check(cfg) -> int:
    from .tasep import invariance_check
    from .verify import talpp_suite
    talpp = talpp_suite(range(cfg.base_seed, cfg.base_seed + min(cfg.seeds, 100)))
    ks, d, lp = tasep_compare(cfg.tasep_t, cfg.seeds, cfg.base_seed, cfg.workers)
    inv = invariance_check(cfg.rho, cfg.tasep_ladder, _seed_list(cfg))
    rep = dict(talpp=talpp, ks=ks, direct_mean=float(np.mean(d)),
               lpp_mean=float(np.mean(lp)), invariance=inv)
    lio.write_json(Path(cfg.out) / "tasep_report.json", rep,
                   lio.meta_block(cfg.as_dict()))
    print(f"tasep-check: TALPP violations {talpp['violations']}, "
          f"KS {'pass' if ks.passed else 'fail'}, "
          f"invariance {'pass' if inv['ok'] else 'fail'}")
    return EXIT_OK if talpp["violations"] == 0 else EXIT_VIOLATION


RUNNERS = {"simulate": run_simulate, "verify": run_verify,
           "converge": run_converge, "exitpoints": run_exitpoints,
           "tasep-check": run_tasep_check}


# ---------------------------------------------------------------- parsing

def _parser():
    p = argparse.ArgumentParser(prog="lpplab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON file; flags override it")
        sp.add_argument("--profile", help='JSON spec, e.g. \'{"kind": "flat"}\'')
        sp.add_argument("--n", type=int)
        sp.add_argument("--t", type=float)
        sp.add_argument("--t-ladder", type=float, nargs="+", dest="t_ladder")
        sp.add_argument("--a", type=float)
        sp.add_argument("--alpha", type=float)
        sp.add_argument("--eta", type=float)
        sp.add_argument("--grid-step", type=float, dest="grid_step")
        sp.add_argument("--seeds", type=int)
        sp.add_argument("--base-seed", type=int, dest="base_seed")
        sp.add_argument("--workers", type=int)
        sp.add_argument("--out")
        sp.add_argument("--rho", type=float)
        sp.add_argument("--r-grid", type=float, nargs="+", dest="r_grid")
        sp.add_argument("--c2", type=float)
        sp.add_argument("--corollary", action="store_true", default=None)
        sp.add_argument("--n-list", type=int, nargs="+", dest="n_list")
        sp.add_argument("--oracle-instances", type=int, dest="oracle_instances")
        sp.add_argument("--tasep-t", type=float, dest="tasep_t")
        sp.add_argument("--tasep-ladder", type=float, nargs="+", dest="tasep_ladder")
        sp.add_argument("--fault", help="test hook: 'decouple'")
    return p


def build_config(argv) -> ExperimentConfig:
    args = _parser().parse_args(argv)
    values: dict = {}
    if args.config:
        try:
            values.update(json.loads(Path(args.config).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for k, v in vars(args).items():
        if k in ("config", "command") or v is None:
            continue
        if k == "profile":
            try:
                v = json.loads(v)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"--profile is not JSON: {exc}") from exc
        values[k] = v
    values["command"] = args.command
    return ExperimentConfig(**values).validate()


def main(argv=None) -> int:
    try:
        cfg = build_config(sys.argv[1:] if argv is None else argv)
        return RUNNERS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"lpplab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # argparse
        return EXIT_USAGE if exc.code else EXIT_OK
    except ValueError as exc:
        print(f"lpplab: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
