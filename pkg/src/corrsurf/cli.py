"""Command-line front end and CSV emission.

Subcommands: simulate | fit | moments | defaultcorr | surface | deltas.
Each accepts flags and/or an INI config file with one section per subcommand
(flags override the file).  All randomness flows from one mandatory --seed;
per-task streams are derived by stable labeled hashing, so identical
config+seed produces byte-identical output files.

Exit codes: 0 success, 1 numeric-domain error, 2 configuration error.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import sys
from pathlib import Path

import numpy as np

from . import estimation, factor_mc, static_copulas, surface as surface_mod, tarch
from .errors import ConfigError, DomainError
from .gaussian import hazard_to_p
from .streams import task_seed


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def parse_grid(text: str) -> np.ndarray:
    """Parse 'a,b,c' or 'start:stop:step' (stop inclusive up to rounding)."""
    text = text.strip()
    if ":" in text:
        parts = [float(x) for x in text.split(":")]
        if len(parts) != 3:
            raise ConfigError(f"grid must be start:stop:step, got {text!r}")
        start, stop, step = parts
        if step <= 0:
            raise ConfigError("grid step must be positive")
        return np.arange(start, stop + 0.5 * step, step)
    return np.array([float(x) for x in text.split(",")])


def _tarch_params(args, require_omega: bool = False) -> tarch.TarchParams:
    alpha = args.alpha if args.alpha is not None else 0.0
    alpha_d = args.alpha_d if args.alpha_d is not None else 0.0
    beta = args.beta if args.beta is not None else 0.0
    nu = args.nu
    if args.omega is not None:
        return tarch.TarchParams(omega=args.omega, alpha=alpha, alpha_d=alpha_d,
                                 beta=beta, nu=nu)
    if require_omega:
        raise ConfigError("this command requires omega (no normalization default)")
    return tarch.TarchParams.normalized(alpha=alpha, alpha_d=alpha_d, beta=beta, nu=nu)


def _factor_spec(args) -> tuple[factor_mc.FactorModelSpec, str]:
    model = args.model
    if model == "gaussian":
        factor = factor_mc.GaussianFactor()
    elif model in ("garch", "tarch"):
        if model == "garch" and args.alpha_d:
            raise ConfigError("model garch does not accept alpha_d")
        factor = factor_mc.TarchFactor(_tarch_params(args))
    elif model == "tcopula":
        factor = factor_mc.StudentTMixingFactor(nu=args.mix_nu)
    elif model == "doublet":
        factor = factor_mc.DoubleTFactor(nu_m=args.market_nu)
    else:
        raise ConfigError(f"unknown model {model!r}")
    spec = factor_mc.FactorModelSpec.from_rho(
        factor, args.rho, idio_nu=args.idio_nu, recovery=args.recovery
    )
    return spec, model


def cmd_simulate(args) -> int:
    params = _tarch_params(args)
    config = tarch.PathConfig(
        horizon_steps=args.horizon, n_paths=args.paths, seed=task_seed(args.seed, "simulate"),
        initial_variance=args.initial_variance, burn_in=args.burn_in,
    )
    rets = tarch.simulate_paths(params, config, n_threads=args.threads)
    out = Path(args.out)
    header = ["path"] + [f"r_{t + 1}" for t in range(args.horizon)]
    write_csv(out / "paths.csv", header,
              ([i, *row] for i, row in enumerate(rets)))
    return 0


def cmd_fit(args) -> int:
    series = estimation.load_return_series(args.input, weekly=args.weekly)
    if args.trim is not None:
        series = estimation.trim_extremes(series, args.trim)
    result = estimation.fit(series, model=args.model_fit, innovation=args.innovation)
    out = Path(args.out)
    rows = []
    for name in ("omega", "alpha", "alpha_d", "beta", "nu"):
        value = getattr(result.params, name)
        if name in result.std_errors:
            rows.append([name, value, result.std_errors[name]])
    rows.append(["loglik", result.loglik, ""])
    rows.append(["converged", int(result.converged), ""])
    rows.append(["n_obs", result.n_obs, ""])
    write_csv(out / "fit.csv", ["parameter", "estimate", "std_error"], rows)
    label = f"{result.model.upper()}" + (" + t" if result.innovation == "student_t" else "")
    print(f"model: {label}   observations: {result.n_obs}")
    for name in ("alpha", "alpha_d", "beta", "nu"):
        if name in result.std_errors:
            print(f"  {name:8s} {getattr(result.params, name):10.4f}  ({result.std_errors[name]:.4f})")
    print(f"  {'LogL':8s} {result.loglik:10.1f}")
    return 0


def cmd_moments(args) -> int:
    params = _tarch_params(args)
    horizons = [int(h) for h in parse_grid(args.horizons)]
    sigma3 = tarch.stationary_sigma3_ratio(
        params, seed=task_seed(args.seed, "moments/sigma3"),
        n_paths=args.paths, burn_in=args.burn_in,
    )
    symmetric_garch = params.alpha_d == 0.0
    rows = []
    for horizon in horizons:
        skew = tarch.aggregated_skewness(params, horizon, sigma3)
        kurt = tarch.aggregated_kurtosis(params, horizon) if symmetric_garch else ""
        var = horizon * tarch.unconditional_variance(params)
        rows.append([horizon, var, skew, kurt])
    out = Path(args.out)
    write_csv(out / "moments.csv", ["horizon", "variance", "skewness", "kurtosis"], rows)

    multipliers = [float(x) for x in args.initial_variance_multipliers.split(",") if x]
    if multipliers:
        s2 = tarch.unconditional_variance(params)
        max_h = max(horizons)
        cond_rows = []
        for mult in multipliers:
            fc = tarch.sigma3_forecast(
                params, mult * s2, max_h, n_paths=args.paths,
                seed=task_seed(args.seed, f"moments/cond/{mult}"),
            )
            for horizon in horizons:
                third = tarch.conditional_third_moment(params, fc[:horizon])
                var = tarch.conditional_aggregate_variance(params, mult * s2, horizon)
                cond_rows.append([horizon, mult, third / var**1.5])
        write_csv(out / "cond_skew.csv",
                  ["horizon", "initial_variance_multiplier", "skewness"], cond_rows)
    return 0


def cmd_defaultcorr(args) -> int:
    spec, model = _factor_spec(args)
    spec = factor_mc.FactorModelSpec(
        factor=spec.factor, loading=spec.loading, horizon_steps=args.horizon,
        idio_nu=spec.idio_nu, recovery=spec.recovery,
    )
    curve = factor_mc.default_corr_mc(
        spec, parse_grid(args.p_grid), n_paths=args.paths,
        seed=task_seed(args.seed, f"defaultcorr/{model}"),
        n_reps=args.reps, n_threads=args.threads,
    )
    write_csv(Path(args.out) / "defaultcorr.csv",
              ["p", "estimate", "lower", "upper"],
              zip(curve.p_grid, curve.estimate, curve.lower, curve.upper))
    return 0


def cmd_surface(args) -> int:
    spec, model = _factor_spec(args)
    k_grid = parse_grid(args.k_grid)
    t_grid = parse_grid(args.t_grid)
    surf = surface_mod.build_surface(
        spec, k_grid, t_grid, hazard=args.hazard, n_paths=args.paths,
        seed=task_seed(args.seed, f"surface/{model}"),
        discrete_hazard=args.discrete_hazard, steps_per_year=args.steps_per_year,
        n_threads=args.threads, model_id=model,
    )
    out = Path(args.out)
    wide_header = ["K"] + [f"T={t:g}" for t in surf.t_grid]
    write_csv(out / "surface_wide.csv", wide_header,
              ([k, *surf.values[i]] for i, k in enumerate(surf.k_grid)))
    long_rows = []
    for j, t in enumerate(surf.t_grid):
        for i, k in enumerate(surf.k_grid):
            if surf.valid[i, j] and 0 < i < len(surf.k_grid) - 1 \
                    and surf.valid[i - 1, j] and surf.valid[i + 1, j]:
                slope = surf.slope_k(i, j)
            else:
                slope = ""
            long_rows.append([k, t, surf.values[i, j], slope, int(surf.valid[i, j])])
    write_csv(out / "surface_long.csv", ["K", "T", "rho", "rho_K", "valid"], long_rows)
    write_csv(out / "tranche_el.csv", ["K", "T", "expected_loss"],
              ([k, t, surf.equity_loss[i, j]]
               for j, t in enumerate(surf.t_grid)
               for i, k in enumerate(surf.k_grid)))
    return 0


def cmd_deltas(args) -> int:
    spec, model = _factor_spec(args)
    report = surface_mod.delta_adjustment(
        spec, parse_grid(args.k_grid), t_years=args.t_years, hazard=args.hazard,
        bump=args.bump, n_paths=args.paths,
        seed=task_seed(args.seed, f"deltas/{model}"),
        steps_per_year=args.steps_per_year, n_threads=args.threads,
    )
    write_csv(Path(args.out) / "deltas.csv",
              ["K", "rho", "rho_h", "psi", "delta_adj", "gaussian_delta_proxy"],
              zip(report.k_grid, report.rho, report.rho_h, report.psi,
                  report.delta_adj, report.gaussian_delta_proxy))
    return 0


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="INI config file; section name = subcommand")
    p.add_argument("--seed", type=int, help="master seed (required; no wall-clock default)")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--threads", type=int, default=1, help="worker threads for path generation")


def _add_tarch_coeffs(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, help="symmetric ARCH coefficient")
    p.add_argument("--alpha-d", type=float, help="downside ARCH coefficient")
    p.add_argument("--beta", type=float, help="variance persistence coefficient")
    p.add_argument("--omega", type=float,
                   help="variance intercept (default: normalized so E sigma^2 = 1)")
    p.add_argument("--nu", type=float, help="Student-t dof for return shocks (default Gaussian)")


def _add_factor_model(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", choices=["gaussian", "garch", "tarch", "tcopula", "doublet"],
                   default="gaussian", help="loss-generating model")
    _add_tarch_coeffs(p)
    p.add_argument("--rho", type=float, default=0.3, help="latent linear correlation b^2")
    p.add_argument("--idio-nu", type=float, help="Student-t dof for idiosyncrasies (default Gaussian)")
    p.add_argument("--mix-nu", type=float, default=12.0, help="t-copula mixing dof")
    p.add_argument("--market-nu", type=float, default=12.0, help="double-t market-factor dof")
    p.add_argument("--recovery", type=float, default=0.4, help="recovery rate")
    p.add_argument("--paths", type=int, default=100_000, help="Monte Carlo paths")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corrsurf",
        description="Dynamic-factor credit loss models and correlation surfaces",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate TARCH/GARCH return paths to CSV")
    _add_common(p)
    _add_tarch_coeffs(p)
    p.add_argument("--horizon", type=int, default=260, help="steps per path")
    p.add_argument("--paths", type=int, default=1000, help="number of paths")
    p.add_argument("--initial-variance", type=float, help="sigma_1^2 (default unconditional)")
    p.add_argument("--burn-in", type=int, default=0, help="discarded leading steps")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit GARCH/TARCH to a return CSV")
    _add_common(p)
    p.add_argument("--input", required=True, help="CSV with (date, level) or (date, return)")
    p.add_argument("--weekly", action="store_true", help="aggregate to calendar weeks ending Friday")
    p.add_argument("--trim", type=float, help="winsorize at this extreme-quantile fraction")
    p.add_argument("--model-fit", choices=["garch", "tarch"], default="tarch", dest="model_fit")
    p.add_argument("--innovation", choices=["gaussian", "student_t"], default="gaussian")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("moments", help="moment term structures of aggregated returns")
    _add_common(p)
    _add_tarch_coeffs(p)
    p.add_argument("--horizons", default="1,4,13,26,52,104,156,260,520",
                   help="comma list or start:stop:step of horizons in steps")
    p.add_argument("--paths", type=int, default=4096, help="simulation paths for sigma^3 estimates")
    p.add_argument("--burn-in", type=int, default=10_000, help="burn-in for the stationary law")
    p.add_argument("--initial-variance-multipliers", default="",
                   help="comma list for conditional skew curves, e.g. 0.5,1,2")
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("defaultcorr", help="default correlation curve rho_d(p)")
    _add_common(p)
    _add_factor_model(p)
    p.add_argument("--horizon", type=int, default=260, help="aggregation steps for dynamic factors")
    p.add_argument("--p-grid", default="0.01,0.02,0.05,0.1", help="default probabilities")
    p.add_argument("--reps", type=int, default=1, help="independent repetitions for bounds")
    p.set_defaults(func=cmd_defaultcorr)

    p = sub.add_parser("surface", help="correlation surface rho(K, T)")
    _add_common(p)
    _add_factor_model(p)
    p.add_argument("--k-grid", default="0.01:0.30:0.01", help="detachment grid")
    p.add_argument("--t-grid", default="1,3,5,7,10", help="maturity grid in years")
    p.add_argument("--hazard", type=float, default=0.02, help="flat hazard rate")
    p.add_argument("--discrete-hazard", action="store_true",
                   help="use p = 1-(1-h)^t instead of continuous compounding")
    p.add_argument("--steps-per-year", type=int, default=52)
    p.set_defaults(func=cmd_surface)

    p = sub.add_parser("deltas", help="tranche delta adjustments from surface hazard slope")
    _add_common(p)
    _add_factor_model(p)
    p.add_argument("--k-grid", default="0.03:0.10:0.01", help="detachment grid")
    p.add_argument("--t-years", type=float, default=5.0)
    p.add_argument("--hazard", type=float, default=0.01)
    p.add_argument("--bump", type=float, default=0.0025, help="hazard bump for drho/dh")
    p.add_argument("--steps-per-year", type=int, default=52)
    p.set_defaults(func=cmd_deltas)
    return parser


def _option_types(parser: argparse.ArgumentParser, command: str) -> dict:
    """Map each option dest of a subcommand to its declared type converter."""
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            sub = action.choices[command]
            out = {}
            for opt in sub._actions:
                if opt.dest == "help":
                    continue
                if isinstance(opt, argparse._StoreTrueAction):
                    out[opt.dest] = bool
                else:
                    out[opt.dest] = opt.type or str
            return out
    return {}


def apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    """Parse argv, then fill unset options from the INI section of the subcommand."""
    args = parser.parse_args(argv)
    if args.config:
        ini = configparser.ConfigParser()
        read = ini.read(args.config)
        if not read:
            raise ConfigError(f"config file not found: {args.config}")
        if args.command in ini:
            section = ini[args.command]
            given = _explicit_flags(argv)
            types = _option_types(parser, args.command)
            for key, raw in section.items():
                dest = key.replace("-", "_")
                if dest not in types:
                    raise ConfigError(f"unknown config key {key!r} in [{args.command}]")
                if dest in given:
                    continue
                converter = types[dest]
                try:
                    value = section.getboolean(key) if converter is bool else converter(raw)
                except ValueError as exc:
                    raise ConfigError(f"config key {key!r}: {exc}") from exc
                setattr(args, dest, value)
    if getattr(args, "seed", None) is None:
        raise ConfigError("seed is required (flag --seed or config key seed)")
    return args


def _explicit_flags(argv: list[str]) -> set[str]:
    out = set()
    for token in argv:
        if token.startswith("--"):
            out.add(token[2:].split("=")[0].replace("-", "_"))
    return out


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = apply_config(parser, argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
