"""Command line interface: config ingestion, dispatch, JSON reporting.

Configs are JSON (a file path, an inline literal, or a built-in fixture
name); flags override config fields.  Every run prints one JSON report

    {"command", "digest", "results", "version", "wall_ms"}

where digest is a stable hash of the canonicalized config, so identical
config and seed produce a byte-identical results object.  Exit codes:
0 success, 2 validation error, 3 budget exceeded, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import __version__, fixtures, geometry, linalg, measures, pressure
from .errors import (
    BudgetError,
    DepthBudgetExceeded,
    MalformedConfig,
    NonContractive,
    NumericError,
    SubaffineError,
    ValidationError,
)
from .symbolic import SubshiftSpec, compile_subshift

DEFAULT_MAX_DEPTH = 64
DEFAULT_MAX_WORDS = 1 << 24


@dataclass(frozen=True, eq=False)
class SystemConfig:
    """Validated run configuration with defaults filled."""

    dimension: int
    matrices: list
    translations: list
    subshift: SubshiftSpec
    measure: object | None
    max_depth: int
    max_words: int
    seed: int
    canonical: dict
    digest: str

    @property
    def kappa(self) -> int:
        return len(self.matrices)

    def automaton(self):
        return compile_subshift(self.subshift)

    def ifs(self) -> geometry.AffineIFS:
        return geometry.AffineIFS(self.matrices, self.translations)

    def require_measure(self):
        """Configured measure, defaulting to the uniform Bernoulli."""
        if self.measure is not None:
            return self.measure
        return measures.BernoulliMeasure([1.0 / self.kappa] * self.kappa)

    def check_depth(self, n: int):
        if n > self.max_depth:
            raise DepthBudgetExceeded(
                f"depth {n} exceeds budgets.max_depth = {self.max_depth}")


def _build_measure(block: dict):
    kind = block.get("type")
    if kind == "bernoulli":
        if "p" not in block:
            raise MalformedConfig("measure.p is required for bernoulli")
        return measures.BernoulliMeasure(block["p"])
    if kind == "markov":
        if "transition" not in block:
            raise MalformedConfig(
                "measure.transition is required for markov")
        return measures.MarkovMeasure(block["transition"],
                                      block.get("stationary"))
    raise MalformedConfig(f"measure.type {kind!r} not in (bernoulli, markov)")


def parse_config(source) -> SystemConfig:
    """Load and validate a config from a dict, path, inline JSON, or
    fixture name.  Errors name the offending field."""
    if isinstance(source, dict):
        raw = source
    elif isinstance(source, str) and source in fixtures.FIXTURES:
        raw = fixtures.fixture_config(source)
    elif isinstance(source, str) and source.lstrip().startswith("{"):
        try:
            raw = json.loads(source)
        except json.JSONDecodeError as e:
            raise MalformedConfig(f"inline config is not valid JSON: {e}")
    elif isinstance(source, str):
        try:
            with open(source) as fh:
                raw = json.load(fh)
        except OSError as e:
            raise MalformedConfig(f"cannot read config {source!r}: {e}")
        except json.JSONDecodeError as e:
            raise MalformedConfig(f"config {source!r} is not valid JSON: {e}")
    else:
        raise MalformedConfig(f"unsupported config source {type(source)}")

    maps = raw.get("maps")
    if not isinstance(maps, list) or len(maps) < 2:
        raise MalformedConfig("maps must list at least 2 affine maps")
    matrices, translations = [], []
    for i, entry in enumerate(maps):
        if "matrix" not in entry:
            raise MalformedConfig(f"maps[{i}].matrix is missing")
        m = np.asarray(entry["matrix"], dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise MalformedConfig(f"maps[{i}].matrix is not square")
        matrices.append(m)
        translations.append(
            np.asarray(entry.get("translation", [0.0] * m.shape[0]),
                       dtype=float))
    d = int(raw.get("dimension", matrices[0].shape[0]))
    for i, m in enumerate(matrices):
        if m.shape != (d, d):
            raise MalformedConfig(
                f"maps[{i}].matrix has shape {m.shape}, expected ({d}, {d})")
        a1 = math.exp(linalg.singular_spectrum(m).log_alphas[0])
        if a1 >= 1.0:
            raise NonContractive(
                f"maps[{i}].matrix has norm {a1:.6g} >= 1")
        if translations[i].shape != (d,):
            raise MalformedConfig(f"maps[{i}].translation is not a {d}-vector")

    sub_block = raw.get("subshift") or {}
    forbidden = tuple(tuple(int(a) for a in w)
                      for w in sub_block.get("forbidden_words", []))
    subshift = SubshiftSpec(len(maps), forbidden)

    measure = None
    if raw.get("measure") is not None:
        measure = _build_measure(raw["measure"])

    budgets = raw.get("budgets") or {}
    max_depth = int(budgets.get("max_depth", DEFAULT_MAX_DEPTH))
    max_words = int(budgets.get("max_words", DEFAULT_MAX_WORDS))
    seed = int(raw.get("seed", 0))

    canonical = {
        "dimension": d,
        "maps": [{"matrix": m.tolist(), "translation": a.tolist()}
                 for m, a in zip(matrices, translations)],
        "subshift": {"forbidden_words": [list(w) for w in forbidden]},
        "measure": raw.get("measure"),
        "budgets": {"max_depth": max_depth, "max_words": max_words},
        "seed": seed,
    }
    digest = hashlib.sha256(
        json.dumps(canonical, sort_keys=True,
                   separators=(",", ":")).encode()).hexdigest()
    return SystemConfig(d, matrices, translations, subshift, measure,
                        max_depth, max_words, seed, canonical, digest)


# ---------------------------------------------------------------------------
# subcommand implementations, each returning a plain results dict

def _estimate_json(est: pressure.PressureEstimate) -> dict:
    return {
        "t": est.t,
        "upper": est.upper,
        "lower": est.lower,
        "assumption": (est.lower_assumption.to_json()
                       if est.lower_assumption else None),
        "n": est.n_used,
    }


def _pressure_args(cfg: SystemConfig, args) -> dict:
    auto = cfg.automaton()
    depths = ([int(x) for x in args.depths.split(",")]
              if args.depths else [args.n])
    for n in depths:
        cfg.check_depth(n)
    return {"automaton": auto, "depths": depths}


def cmd_pressure(cfg: SystemConfig, args) -> dict:
    ctx = _pressure_args(cfg, args)
    est = pressure.pressure_upper(args.t, ctx["depths"], ctx["automaton"],
                                  cfg.matrices, max_words=cfg.max_words)
    if args.lower_m:
        cfg.check_depth(args.lower_m)
        low = pressure.pressure_lower(
            args.t, args.lower_m, ctx["automaton"], cfg.matrices,
            D=args.d_const, probe_depth=args.probe_depth,
            max_words=cfg.max_words)
        est = pressure.PressureEstimate(
            est.t, min(est.upper, low.upper),
            est.n_used if est.upper <= low.upper else low.n_used,
            low.lower, low.lower_assumption)
    return _estimate_json(est)


def cmd_curve(cfg: SystemConfig, args) -> dict:
    ctx = _pressure_args(cfg, args)
    ts = np.linspace(args.t_min, args.t_max, args.points)
    ests = pressure.pressure_curve(ts, ctx["depths"], ctx["automaton"],
                                   cfg.matrices, max_words=cfg.max_words)
    return {"curve": [_estimate_json(e) for e in ests]}


def cmd_dimension(cfg: SystemConfig, args) -> dict:
    cfg.check_depth(args.n)
    if args.lower_m:
        cfg.check_depth(args.lower_m)
    br = pressure.singularity_dimension(
        args.n, cfg.automaton(), cfg.matrices, tol=args.tol,
        lower_block=args.lower_m or None, D=args.d_const,
        probe_depth=args.probe_depth, max_words=cfg.max_words)
    return {
        "s_upper": br.s_upper,
        "s_lower": br.s_lower,
        "assumption": (br.lower_assumption.to_json()
                       if br.lower_assumption else None),
        "n": br.n_used,
        "tolerance": br.tolerance,
    }


def cmd_kink(cfg: SystemConfig, args) -> dict:
    if args.n:
        cfg.check_depth(args.n)
    kinks = pressure.detect_kink(
        cfg.automaton(), cfg.matrices, (args.t_min, args.t_max),
        grid=args.grid, jump_threshold=args.threshold,
        n=args.n, h=args.h, max_words=cfg.max_words)
    return {"kinks": [{"t_star": k.t_star, "jump": k.jump} for k in kinks]}


def cmd_entropy(cfg: SystemConfig, args) -> dict:
    cfg.check_depth(args.n)
    mu = cfg.require_measure()
    out = {"n": args.n,
           "entropy": measures.entropy_finite(mu, args.n, cfg.automaton(),
                                              max_words=cfg.max_words)}
    try:
        out["closed_form"] = measures.entropy_closed(mu)
    except AttributeError:
        out["closed_form"] = None
    return out


def cmd_energy(cfg: SystemConfig, args) -> dict:
    cfg.check_depth(args.n)
    value = measures.energy_finite(cfg.require_measure(), args.t, args.n,
                                   cfg.automaton(), cfg.matrices,
                                   max_words=cfg.max_words)
    return {"t": args.t, "n": args.n, "energy": value}


def cmd_lyapunov(cfg: SystemConfig, args) -> dict:
    cfg.check_depth(args.n)
    lams = measures.lyapunov(cfg.require_measure(), args.n, cfg.automaton(),
                             cfg.matrices, max_words=cfg.max_words)
    return {"n": args.n, "exponents": [float(x) for x in lams]}


def cmd_gap(cfg: SystemConfig, args) -> dict:
    cfg.check_depth(args.n)
    gap = measures.equilibrium_gap(cfg.require_measure(), args.t, args.n,
                                   cfg.automaton(), cfg.matrices,
                                   max_words=cfg.max_words)
    return {"t": args.t, "n": args.n, "gap": gap}


def cmd_gibbs(cfg: SystemConfig, args) -> dict:
    cfg.check_depth(args.gibbs_depth)
    prof = measures.gibbs_ratio_profile(
        cfg.require_measure(), args.t, args.pressure_value, args.gibbs_depth,
        cfg.automaton(), cfg.matrices, max_words=cfg.max_words)
    return {
        "t": args.t,
        "pressure_value": args.pressure_value,
        "max_depth": args.gibbs_depth,
        "min_ratio": prof.min_ratio,
        "max_ratio": prof.max_ratio,
        "per_depth": [
            {"n": int(n), "min": float(lo), "max": float(hi)}
            for n, lo, hi in zip(prof.depths, prof.min_ratios,
                                 prof.max_ratios)],
    }


def cmd_empirical_equilibrium(cfg: SystemConfig, args) -> dict:
    cfg.check_depth(args.n)
    cd = measures.empirical_equilibrium(args.t, args.n, args.k,
                                        cfg.automaton(), cfg.matrices,
                                        max_words=cfg.max_words)
    return {
        "t": args.t, "n": args.n, "k": args.k,
        "weights": {",".join(map(str, w)): v
                    for w, v in sorted(cd.weights.items())},
        "consistent": (measures.check_consistency(cd, tol=1e-9)
                       if args.k >= 2 else None),
    }


def _write_points_csv(points: np.ndarray, stream):
    for row in points:
        stream.write(",".join("%.17g" % x for x in row) + "\n")


def cmd_sample(cfg: SystemConfig, args) -> dict | None:
    cfg.check_depth(args.n)
    cloud = geometry.attractor_sample(args.n, cfg.ifs(), cfg.automaton(),
                                      max_words=cfg.max_words)
    if args.csv:
        with open(args.csv, "w") as fh:
            _write_points_csv(cloud.points, fh)
        return {"n": args.n, "points": cloud.size,
                "resolution": cloud.resolution, "csv": args.csv}
    _write_points_csv(cloud.points, sys.stdout)
    return None


def cmd_boxcount(cfg: SystemConfig, args) -> dict:
    cfg.check_depth(args.n)
    cloud = geometry.attractor_sample(args.n, cfg.ifs(), cfg.automaton(),
                                      max_words=cfg.max_words)
    scales = ([float(x) for x in args.scales.split(",")]
              if args.scales else None)
    anchor = ([float(x) for x in args.anchor.split(",")]
              if args.anchor else None)
    rep = geometry.box_count(cloud, anchor=anchor, scales=scales)
    if args.csv:
        with open(args.csv, "w") as fh:
            for eps, cnt in zip(rep.scales, rep.counts):
                fh.write("%.17g,%d\n" % (eps, cnt))
    return {
        "n": args.n,
        "scales": [float(x) for x in rep.scales],
        "counts": [int(c) for c in rep.counts],
        "slope": rep.slope,
        "r_squared": rep.r_squared,
    }


def cmd_cone_check(cfg: SystemConfig, args) -> dict:
    theta = np.array([float(x) for x in args.theta.split(",")])
    res = linalg.check_cone_condition(cfg.matrices, theta, args.beta)
    return {"ok": res.ok, "margin": res.margin,
            "theta": [float(x) for x in theta], "beta": args.beta}


def cmd_probe_d(cfg: SystemConfig, args) -> dict:
    cfg.check_depth(args.m)
    d_emp = linalg.probe_quasimultiplicativity(args.t, args.m,
                                               cfg.automaton(), cfg.matrices)
    return {"t": args.t, "m": args.m, "D": d_emp,
            "note": "empirical, depth-bounded probe"}


def _example_not_unique(cfg: SystemConfig) -> dict:
    auto = cfg.automaton()
    br = pressure.singularity_dimension(16, auto, cfg.matrices, tol=1e-8)
    mu = cfg.require_measure()
    p = mu.p
    nu = measures.BernoulliMeasure(p[::-1].copy())
    eta = measures.MixtureMeasure([mu, nu], [0.5, 0.5])
    s = br.s_upper
    prof = measures.gibbs_ratio_profile(eta, s, 0.0, 12, auto, cfg.matrices)
    lams = measures.lyapunov(mu, 10000, auto, cfg.matrices)
    h = measures.entropy_finite(mu, 10000, auto)
    return {
        "s_upper_n16": br.s_upper,
        "pressure_closed_form_at_s": pressure.diagonal_pressure(
            min(s, 1.0), cfg.matrices),
        "gap_mu_n12": measures.equilibrium_gap(mu, s, 12, auto, cfg.matrices),
        "gap_nu_n12": measures.equilibrium_gap(nu, s, 12, auto, cfg.matrices),
        "gap_mixture_n12": measures.equilibrium_gap(eta, s, 12, auto,
                                                    cfg.matrices),
        "mixture_gibbs": {"min": prof.min_ratio, "max": prof.max_ratio},
        "lyapunov_mu_n10000": [float(x) for x in lams],
        "variational_residual": h + s * float(lams[0]),
    }


def _example_no_semiconformal(cfg: SystemConfig) -> dict:
    auto = cfg.automaton()
    lam = float(cfg.matrices[0][0][0])
    s = math.log(2.0) / math.log(1.0 / lam)
    br = pressure.singularity_dimension(16, auto, cfg.matrices, tol=1e-8)
    mu = cfg.require_measure()
    p_at_s = math.log(2.0) + s * math.log(lam)
    prof = measures.gibbs_ratio_profile(mu, s, p_at_s, 24, auto,
                                        cfg.matrices)
    return {
        "s_exact": s,
        "s_upper_n16": br.s_upper,
        "probe_D": {str(m): linalg.probe_quasimultiplicativity(
            s, m, auto, cfg.matrices) for m in (2, 4, 6)},
        "gibbs_min_times_n_to_s": {
            str(n): float(prof.min_ratios[n - 1] * n ** s)
            for n in (8, 16, 24)},
    }


def _example_nondifferentiable(cfg: SystemConfig) -> dict:
    auto = cfg.automaton()
    kinks = pressure.detect_kink(auto, cfg.matrices, (0.5, 1.0),
                                 grid=64, jump_threshold=0.2)
    ts = [0.6, 0.75, 0.9]
    curve = [{"t": t,
              "upper": pressure.DepthPressure(auto, cfg.matrices, 4096)(t),
              "closed_form": pressure.diagonal_pressure(t, cfg.matrices)}
             for t in ts]
    return {
        "kinks": [{"t_star": k.t_star, "jump": k.jump} for k in kinks],
        "curve_n4096": curve,
    }


def _example_tractable(cfg: SystemConfig) -> dict:
    auto = cfg.automaton()
    ifs = cfg.ifs()
    cone = linalg.check_cone_condition(
        cfg.matrices, np.array([1.0, 1.0]) / math.sqrt(2.0),
        math.pi / 2.0 - 0.01)
    cloud = geometry.attractor_sample(16, ifs, auto)
    rep = geometry.box_count(cloud)
    hp = geometry.hyperplane_check(cloud)
    br = pressure.singularity_dimension(16, auto, cfg.matrices, tol=1e-8)
    return {
        "cone_ok": cone.ok,
        "cone_margin": cone.margin,
        "hyperplane_rank": hp.rank,
        "hyperplane_contained": hp.contained,
        "box_slope": rep.slope,
        "s_upper_n16": br.s_upper,
        "dimension_drop": br.s_upper - rep.slope,
    }


_EXAMPLE_SUITES = {
    "not-unique": _example_not_unique,
    "no-semiconformal": _example_no_semiconformal,
    "nondifferentiable": _example_nondifferentiable,
    "tractable": _example_tractable,
}


def cmd_example(cfg: SystemConfig, args) -> dict:
    suite = _EXAMPLE_SUITES[args.name]
    return {"fixture": args.name, "diagnostics": suite(cfg)}


# ---------------------------------------------------------------------------
# argument parsing and dispatch

def _add_common(p: argparse.ArgumentParser, default_config=None):
    p.add_argument("--config", default=default_config,
                   help="config path, inline JSON, or fixture name")
    p.add_argument("--seed", type=int, default=None,
                   help="override config seed")
    p.add_argument("--max-words", type=int, default=None,
                   help="override budgets.max_words")
    p.add_argument("--max-depth", type=int, default=None,
                   help="override budgets.max_depth")
    p.add_argument("--threads", type=int, default=None,
                   help="cap worker threads (numerics are vectorized; "
                        "kept for interface stability)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="subaffine",
        description="thermodynamic-formalism diagnostics for "
                    "sub-self-affine sets")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pressure", help="pressure bounds at one t")
    _add_common(p)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--n", type=int, default=12)
    p.add_argument("--depths", default=None,
                   help="comma list of depths for the upper bound")
    p.add_argument("--lower-m", type=int, default=None)
    p.add_argument("--d-const", type=float, default=None)
    p.add_argument("--probe-depth", type=int, default=None)
    p.set_defaults(fn=cmd_pressure)

    p = sub.add_parser("curve", help="pressure bounds on a t grid")
    _add_common(p)
    p.add_argument("--t-min", type=float, default=0.0)
    p.add_argument("--t-max", type=float, default=2.0)
    p.add_argument("--points", type=int, default=21)
    p.add_argument("--n", type=int, default=12)
    p.add_argument("--depths", default=None)
    p.set_defaults(fn=cmd_curve)

    p = sub.add_parser("dimension", help="singularity dimension bracket")
    _add_common(p)
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--lower-m", type=int, default=None)
    p.add_argument("--d-const", type=float, default=None)
    p.add_argument("--probe-depth", type=int, default=None)
    p.set_defaults(fn=cmd_dimension)

    p = sub.add_parser("kink", help="locate pressure nondifferentiability")
    _add_common(p)
    p.add_argument("--t-min", type=float, default=0.05)
    p.add_argument("--t-max", type=float, default=0.95)
    p.add_argument("--grid", type=int, default=64)
    p.add_argument("--threshold", type=float, default=0.25)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--h", type=float, default=1e-3)
    p.set_defaults(fn=cmd_kink)

    p = sub.add_parser("entropy", help="finite-depth entropy of the measure")
    _add_common(p)
    p.add_argument("--n", type=int, default=10)
    p.set_defaults(fn=cmd_entropy)

    p = sub.add_parser("energy", help="finite-depth t-energy of the measure")
    _add_common(p)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--n", type=int, default=10)
    p.set_defaults(fn=cmd_energy)

    p = sub.add_parser("lyapunov", help="finite-depth Lyapunov exponents")
    _add_common(p)
    p.add_argument("--n", type=int, default=12)
    p.set_defaults(fn=cmd_lyapunov)

    p = sub.add_parser("gap", help="equilibrium gap of the measure")
    _add_common(p)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--n", type=int, default=10)
    p.set_defaults(fn=cmd_gap)

    p = sub.add_parser("gibbs", help="Gibbs ratio extremes by depth")
    _add_common(p)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--pressure-value", type=float, default=0.0)
    p.add_argument("--depth", dest="gibbs_depth", type=int, default=12,
                   help="probe all word lengths up to this depth")
    p.set_defaults(fn=cmd_gibbs)

    p = sub.add_parser("empirical-equilibrium",
                       help="marginal of the phi^t-weighted word measure")
    _add_common(p)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--n", type=int, default=12)
    p.add_argument("--k", type=int, default=3)
    p.set_defaults(fn=cmd_empirical_equilibrium)

    p = sub.add_parser("sample", help="attractor point cloud as CSV")
    _add_common(p)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--csv", default=None,
                   help="write points here instead of stdout")
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("boxcount", help="box-counting dimension estimate")
    _add_common(p)
    p.add_argument("--n", type=int, default=12)
    p.add_argument("--scales", default=None, help="comma list of scales")
    p.add_argument("--anchor", default=None, help="comma list, grid anchor")
    p.add_argument("--csv", default=None,
                   help="also write (eps, N) pairs to this file")
    p.set_defaults(fn=cmd_boxcount)

    p = sub.add_parser("cone-check", help="planar cone condition check")
    _add_common(p)
    p.add_argument("--theta", default="1,1")
    p.add_argument("--beta", type=float, default=math.pi / 2 - 0.01)
    p.set_defaults(fn=cmd_cone_check)

    p = sub.add_parser("probe-d", help="empirical quasi-multiplicativity")
    _add_common(p)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--m", type=int, default=5)
    p.set_defaults(fn=cmd_probe_d)

    p = sub.add_parser("example", help="run a fixture's diagnostic suite")
    p.add_argument("name", choices=sorted(fixtures.FIXTURES))
    _add_common(p)
    p.set_defaults(fn=cmd_example)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        source = args.config
        if source is None:
            if args.command == "example":
                source = args.name
            else:
                raise MalformedConfig("--config is required")
        cfg = parse_config(source)
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.max_words is not None or args.max_depth is not None:
            overrides["budgets"] = {
                "max_depth": args.max_depth or cfg.max_depth,
                "max_words": args.max_words or cfg.max_words,
            }
        if overrides:
            cfg = parse_config({**cfg.canonical, **overrides})
        results = args.fn(cfg, args)
    except SubaffineError as e:
        print(f"error: {e}", file=sys.stderr)
        if isinstance(e, BudgetError):
            return 3
        if isinstance(e, NumericError):
            return 4
        return 2
    if results is None:  # raw CSV already streamed (sample to stdout)
        return 0
    report = {
        "command": args.command,
        "digest": cfg.digest,
        "results": results,
        "version": __version__,
        "wall_ms": round((time.perf_counter() - started) * 1000.0, 3),
    }
    print(json.dumps(report, sort_keys=True, indent=2))
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
