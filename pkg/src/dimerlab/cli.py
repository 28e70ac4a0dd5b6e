"""Command-line front end: experiment orchestration and result emission.

Every run is fully described by its flags (optionally seeded from a flat
key=value config file, with flags taking precedence); no environment state
is consulted, so identical configurations produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import criticalwalk, dynamics, lyapunov, model, output


def grid_spec(text: str) -> np.ndarray:
    """Parse 'min:max:count' into an inclusive linear grid."""
    try:
        lo_s, hi_s, count_s = text.split(":")
        lo, hi, count = float(lo_s), float(hi_s), int(count_s)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected min:max:count, got {text!r}"
        ) from None
    if count < 1:
        raise argparse.ArgumentTypeError(f"count must be >= 1, got {count}")
    return np.linspace(lo, hi, count)


def log_grid_spec(text: str) -> np.ndarray:
    """Parse 'min:max:count' into a log-spaced grid of positive times."""
    grid = grid_spec(text)
    if grid[0] <= 0:
        raise argparse.ArgumentTypeError("log-spaced grid needs positive endpoints")
    return np.geomspace(grid[0], grid[-1], grid.size)


def interval_spec(text: str):
    """Parse 'a:b' into a closed interval; 'full' selects the whole spectrum."""
    if text == "full":
        return "full"
    try:
        lo_s, hi_s = text.split(":")
        lo, hi = float(lo_s), float(hi_s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a:b or 'full', got {text!r}") from None
    if hi < lo:
        raise argparse.ArgumentTypeError(f"empty interval {text!r}")
    return (lo, hi)


def psi_spec(text: str):
    if text == "delta":
        return ("delta", None)
    if text.startswith("exp:"):
        try:
            theta = float(text[4:])
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad mass in {text!r}") from None
        if theta <= 0:
            raise argparse.ArgumentTypeError("exponential mass must be positive")
        return ("exp", theta)
    raise argparse.ArgumentTypeError(f"expected 'delta' or 'exp:<theta>', got {text!r}")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dimerlab",
        description="Numerical laboratory for the 1D random dimer model",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    subparsers = {}

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="flat key=value config file; flags override")
        p.add_argument("--seed", type=int, default=0, help="64-bit master seed")
        p.add_argument("--out", default=None, help="output file path")
        subparsers[name] = p
        return p

    p = add("lyapunov-scan", "Lyapunov exponent over an energy grid")
    p.add_argument("--V", type=float, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--energies", type=grid_spec, required=True, metavar="MIN:MAX:COUNT")
    p.add_argument("--steps", type=int, default=100000)
    p.add_argument("--realizations", type=int, default=10)
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = add("critical-check", "exact criticality verdict at one energy")
    p.add_argument("--V", type=float, required=True)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--E", type=float, required=True)

    p = add("walk-stats", "Monte Carlo walk statistics at a critical couple")
    p.add_argument("--couple", choices=("half-sqrt2", "sqrt2"), required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--n-matrices", type=int, default=1000)
    p.add_argument("--trials", type=int, default=10000)

    p = add("dynamics", "spectrally projected moment growth on a finite box")
    p.add_argument("--V", type=float, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--N", type=int, default=1024)
    p.add_argument("--q", type=float, default=2.0)
    p.add_argument("--interval", type=interval_spec, default="full", metavar="A:B|full")
    p.add_argument("--times", type=log_grid_spec, default=log_grid_spec("1:1000:61"),
                   metavar="MIN:MAX:COUNT")
    p.add_argument("--psi", type=psi_spec, default=psi_spec("delta"),
                   metavar="delta|exp:THETA")
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = add("eigenstats", "eigenfunction localization profiles of a finite box")
    p.add_argument("--V", type=float, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--N", type=int, default=1024)
    p.add_argument("--floor", type=float, default=1e-12)
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    return parser, subparsers


def apply_config(parser, subparser, command_argv, config_path):
    """Install config-file values as subcommand defaults; flags still win."""
    values = {}
    try:
        fh = open(config_path)
    except OSError as exc:
        parser.error(f"cannot read config file: {exc}")
    with fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                parser.error(f"{config_path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()

    actions = {}
    for action in subparser._actions:
        for opt in action.option_strings:
            actions[opt.lstrip("-")] = action
    defaults = {}
    for key, value in values.items():
        action = actions.get(key)
        if action is None or key == "config":
            parser.error(f"unknown config key '{key}' in {config_path}")
        try:
            defaults[action.dest] = action.type(value) if action.type else value
        except (ValueError, argparse.ArgumentTypeError) as exc:
            parser.error(f"config key '{key}': {exc}")
        action.required = False
    subparser.set_defaults(**defaults)


def _dimer_params(parser, args) -> model.DimerParams:
    try:
        return model.DimerParams(V=args.V, p=args.p)
    except ValueError as exc:
        parser.error(str(exc))


def _class_dict(sc) -> dict:
    return {"kind": sc.kind.value, "trace": sc.trace,
            "spectral_radius": sc.spectral_radius}


def run_lyapunov_scan(parser, args) -> list[str]:
    params = _dimer_params(parser, args)
    estimates = lyapunov.scan_gamma(
        params, args.energies, args.steps, args.realizations, args.seed
    )
    rows = []
    for est in estimates:
        verdict = lyapunov.classify_criticality(params, est.energy).verdict.value
        rows.append(
            (est.energy, est.gamma_per_dimer, est.gamma_per_site, est.std_error,
             est.n_steps, est.n_realizations, verdict)
        )
    out = args.out or "lyapunov_scan." + args.format
    header = ["E", "gamma_per_dimer", "gamma_per_site", "std_error",
              "n_steps", "n_realizations", "verdict"]
    if args.format == "csv":
        output.write_csv(out, header, rows)
    else:
        output.write_json(out, {"rows": [dict(zip(header, row)) for row in rows]})
    return [out]


def run_critical_check(parser, args) -> list[str]:
    params = _dimer_params(parser, args)
    report = lyapunov.classify_criticality(params, args.E)
    out = args.out or "critical_check.json"
    output.write_json(
        out,
        {
            "V": params.V,
            "E": args.E,
            "verdict": report.verdict.value,
            "matched_condition": report.matched_condition,
            "alpha": report.alpha,
            "beta": report.beta,
            "class_alpha": _class_dict(report.class_alpha),
            "class_beta": _class_dict(report.class_beta),
        },
    )
    return [out]


def run_walk_stats(parser, args) -> list[str]:
    couple = criticalwalk.Couple(args.couple)
    if not 0.0 < args.p < 1.0:
        parser.error(f"p must lie in (0,1), got {args.p}")
    stats = criticalwalk.simulate_walk(
        couple, args.p, args.n_matrices, args.trials, args.seed
    )
    out = args.out or "walk_stats.json"
    output.atomic_write_text(out, stats.to_json() + "\n")
    return [out]


def _prepare_box(parser, args):
    params = _dimer_params(parser, args)
    if args.N < 4 or args.N % 2:
        parser.error(f"N must be even and >= 4, got {args.N}")
    disorder = model.sample_disorder(params, args.N // 2, args.seed)
    return params, dynamics.diagonalize(disorder, args.N)


def run_dynamics(parser, args) -> list[str]:
    params, sd = _prepare_box(parser, args)
    interval = args.interval
    if interval == "full":
        interval = model.almost_sure_spectrum(params).hull
    kind, theta = args.psi
    psi0 = (dynamics.delta_state(sd.N) if kind == "delta"
            else dynamics.exponential_state(sd.N, theta))
    series = dynamics.moment_series(sd, psi0, interval, args.q, args.times)
    out = args.out or "dynamics." + args.format
    header = ["t", "r", "sup_value"]
    rows = [(float(t), float(r), series.sup_value)
            for t, r in zip(series.times, series.values)]
    if args.format == "csv":
        output.write_csv(out, header, rows)
    else:
        output.write_json(
            out,
            {"q": series.q, "interval": list(series.interval),
             "sup_value": series.sup_value,
             "rows": [dict(zip(header, row)) for row in rows]},
        )
    return [out]


def run_eigenstats(parser, args) -> list[str]:
    if not 0.0 < args.floor < 1.0:
        parser.error(f"floor must lie in (0,1), got {args.floor}")
    _, sd = _prepare_box(parser, args)
    profiles = dynamics.localization_profiles(sd, args.floor)
    out = args.out or "eigenstats." + args.format
    header = ["index", "energy", "center", "decay_rate", "fit_r2", "degenerate"]
    rows = [(pr.index, pr.energy, pr.center, pr.decay_rate, pr.fit_r2,
             int(pr.degenerate)) for pr in profiles]
    if args.format == "csv":
        output.write_csv(out, header, rows)
    else:
        output.write_json(out, {"rows": [dict(zip(header, row)) for row in rows]})
    return [out]


_RUNNERS = {
    "lyapunov-scan": run_lyapunov_scan,
    "critical-check": run_critical_check,
    "walk-stats": run_walk_stats,
    "dynamics": run_dynamics,
    "eigenstats": run_eigenstats,
}


def _peek_config(argv, subparsers):
    """Locate the subcommand and any --config value without a full parse.

    Config defaults must be installed before parse_args runs, or required
    flags supplied only by the file would be rejected.
    """
    command = next((a for a in argv if a in subparsers), None)
    config = None
    for i, arg in enumerate(argv):
        if arg == "--config" and i + 1 < len(argv):
            config = argv[i + 1]
        elif arg.startswith("--config="):
            config = arg.partition("=")[2]
    return command, config


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser, subparsers = build_parser()
    command, config = _peek_config(argv, subparsers)
    if command is not None and config is not None:
        apply_config(parser, subparsers[command], argv, config)
    args = parser.parse_args(argv)

    started = time.monotonic()
    try:
        outputs = _RUNNERS[args.command](parser, args)
    except (model.LengthMismatch, lyapunov.InsufficientSignal,
            dynamics.ConvergenceFailure, dynamics.NonPositiveValues,
            ValueError, OSError) as exc:
        print(f"dimerlab: error: {exc}", file=sys.stderr)
        return 1
    manifest_params = {
        k: v for k, v in vars(args).items()
        if k not in ("command", "config", "seed", "out")
    }
    for key, value in manifest_params.items():
        if isinstance(value, np.ndarray):
            manifest_params[key] = value.tolist()
        elif isinstance(value, tuple):
            manifest_params[key] = list(value)
    output.write_manifest(
        outputs[0] + ".manifest.json",
        command=args.command,
        params=manifest_params,
        seed=args.seed,
        outputs=outputs,
        wall_time_s=time.monotonic() - started,
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
