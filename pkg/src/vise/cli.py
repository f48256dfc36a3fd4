"""Command-line interface.

Subcommands mirror the experiments module: sweep, pit, spline, ladder,
sensitivity, simulate, verify. Tables go to --out as CSV (stdout when
omitted); the curve-producing commands also render a PNG when --fig is
given. A flat key=value config file can preset any flag; explicit flags win.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional

from . import experiments, simulate, tables
from .analytic import EXACT_SUM, MONTE_CARLO, NORMAL_APPROX
from .core import Environment, VotingRule

_METHOD_CHOICES = {
    "exact": (EXACT_SUM,),
    "approx": (NORMAL_APPROX,),
    "mc": (MONTE_CARLO,),
    "all": (EXACT_SUM, NORMAL_APPROX, MONTE_CARLO),
}

# name, type, default, help; None default means "required via flag or config".
_OPTIONS = {
    "sweep": [
        ("n", int, 21, "number of voters"),
        ("sigma", float, 10.0, "increment standard deviation"),
        ("alpha", float, 0.5, "acceptance threshold"),
        ("rho-min", float, -2.0, "left end of the rho grid"),
        ("rho-max", float, 2.0, "right end of the rho grid"),
        ("points", int, 81, "grid size"),
        ("method", str, "exact", "exact|approx|mc|all"),
        ("proposals", int, 200_000, "Monte Carlo proposals per grid point"),
        ("seed", int, 1, "RNG seed"),
        ("workers", int, 1, "concurrent trial workers"),
    ],
    "pit": [
        ("n", int, 21, "number of voters"),
        ("sigma", float, 1.0, "increment standard deviation"),
        ("alpha", float, 0.5, "acceptance threshold"),
        ("epsilon", float, 1e-3, "left-boundary negligibility level, in units of sigma"),
    ],
    "spline": [
        ("n", int, 21, "number of voters"),
        ("sigma", float, 10.0, "increment standard deviation"),
        ("rho-min", float, -3.0, "left end of the rho grid"),
        ("rho-max", float, 3.0, "right end of the rho grid"),
        ("points", int, 121, "grid size"),
    ],
    "ladder": [
        ("n", int, 21, "number of voters"),
        ("rho-min", float, -0.5, "left end of the rho grid"),
        ("rho-max", float, 0.5, "right end of the rho grid"),
        ("points", int, 100, "grid size"),
    ],
    "sensitivity": [
        ("rho-min", float, -3.0, "left end of the rho grid"),
        ("rho-max", float, 3.0, "right end of the rho grid"),
        ("points", int, 121, "grid size"),
    ],
    "simulate": [
        ("n", int, 21, "number of voters"),
        ("sigma", float, 10.0, "increment standard deviation"),
        ("mu", float, None, "environment mean (overrides --rho)"),
        ("rho", float, 0.0, "normalized mean; mu = rho * sigma"),
        ("alpha", float, 0.5, "acceptance threshold"),
        ("steps", int, 1000, "proposals per trial"),
        ("trials", int, 100, "independent trials"),
        ("seed", int, 1, "RNG seed"),
        ("workers", int, 1, "concurrent trial workers"),
        ("initial-capital", float, 0.0, "starting capital per agent"),
        ("ruin-level", float, 0.0, "final capital strictly below this counts as ruin"),
    ],
    "verify": [
        ("seed", int, 1, "RNG seed"),
        ("budget", int, 1_000_000, "proposals per Monte Carlo cell (>= 1e5)"),
        ("se-limit", float, 3.0, "soft standard-error multiple for oracle cells"),
        ("workers", int, 1, "concurrent trial workers"),
    ],
}

_HELP = {
    "sweep": "expected-increment curve over a rho grid",
    "pit": "locate and measure the pit of losses",
    "spline": "best threshold class and value per rho",
    "ladder": "continuous vs ladder vs brute-force optimal thresholds",
    "sensitivity": "optimal-threshold slope and tail comparison",
    "simulate": "one seeded Monte Carlo run, summarized",
    "verify": "run the invariant suite; exit 1 on any failure",
}

_FIG_COMMANDS = ("sweep", "pit", "spline", "ladder", "sensitivity")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vise",
        description="Expected capital increments and optimal acceptance thresholds "
        "for alpha-majority voting in a stochastic environment.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for command, options in _OPTIONS.items():
        sp = sub.add_parser(command, help=_HELP[command])
        for name, typ, default, help_text in options:
            extra = {}
            if name == "method":
                extra["choices"] = sorted(_METHOD_CHOICES)
            sp.add_argument(
                f"--{name}",
                type=typ,
                default=None,
                help=f"{help_text} (default: {default})",
                **extra,
            )
        sp.add_argument("--config", help="flat key=value file presetting any flag; flags win")
        sp.add_argument("--out", help="output file (default: CSV to stdout)")
        if command in _FIG_COMMANDS:
            sp.add_argument("--fig", help="also render a PNG figure to this path")
    return parser


def parse_config_file(path: str) -> dict[str, str]:
    """Read `key = value` lines; '#' starts a comment; keys may use - or _."""
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
            key, value = line.split("=", 1)
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _resolve(args: argparse.Namespace) -> dict:
    """Merge CLI flags over config-file values over built-in defaults."""
    config = parse_config_file(args.config) if args.config else {}
    used = set()
    resolved = {}
    for name, typ, default, _ in _OPTIONS[args.command]:
        dest = name.replace("-", "_")
        cli_value = getattr(args, dest)
        if cli_value is not None:
            resolved[dest] = cli_value
        elif dest in config:
            resolved[dest] = typ(config[dest])
            used.add(dest)
        else:
            resolved[dest] = default
    for key in config:
        if key not in used and key.replace("-", "_") not in resolved:
            print(f"warning: config key {key!r} not used by '{args.command}'", file=sys.stderr)
    return resolved


def _cmd_sweep(o: dict, out: Optional[str], fig: Optional[str]) -> int:
    methods = _METHOD_CHOICES[o["method"]]
    rows = experiments.sweep_increment(
        o["n"], o["sigma"], o["alpha"], (o["rho_min"], o["rho_max"]), o["points"],
        methods=methods, proposals=o["proposals"], seed=o["seed"], workers=o["workers"],
    )
    header = ["n", "sigma", "alpha", "rho", "mu", "method", "value", "std_error"]
    tables.write_csv(out, header, (
        [o["n"], o["sigma"], o["alpha"], p.rho, p.rho * o["sigma"], p.method, p.value, p.std_error]
        for p in rows
    ))
    if fig:
        from . import plotting

        plotting.save_sweep_figure(rows, o["n"], o["sigma"], o["alpha"], fig)
    return 0


def _cmd_pit(o: dict, out: Optional[str], fig: Optional[str]) -> int:
    report = experiments.pit_report(o["n"], o["sigma"], o["alpha"], o["epsilon"])
    header = ["n", "sigma", "alpha", "epsilon", "has_pit",
              "right_zero", "min_rho", "min_value", "left_epsilon_bound"]
    if report is None:
        row = [o["n"], o["sigma"], o["alpha"], o["epsilon"], False, None, None, None, None]
        print("no pit: the curve never dips below zero and recovers in the window", file=sys.stderr)
    else:
        row = [o["n"], o["sigma"], o["alpha"], o["epsilon"], True,
               report.right_zero, report.min_rho, report.min_value, report.left_epsilon_bound]
        print(
            f"pit: zero crossing at rho={report.right_zero:.6g}, "
            f"depth {report.min_value:.6g} at rho={report.min_rho:.6g}",
            file=sys.stderr,
        )
    tables.write_csv(out, header, [row])
    if fig:
        from . import plotting

        curve = experiments.sweep_increment(
            o["n"], o["sigma"], o["alpha"], experiments.PIT_WINDOW, 241, methods=(EXACT_SUM,)
        )
        plotting.save_pit_figure(report, curve, o["n"], o["sigma"], o["alpha"], fig)
    return 0


def _cmd_spline(o: dict, out: Optional[str], fig: Optional[str]) -> int:
    rows = experiments.optimal_spline(o["n"], o["sigma"], (o["rho_min"], o["rho_max"]), o["points"])
    header = ["n", "sigma", "rho", "mu", "best_alpha_class", "best_value"]
    tables.write_csv(out, header, (
        [o["n"], o["sigma"], p.rho, p.rho * o["sigma"], p.best_alpha_class, p.best_value]
        for p in rows
    ))
    if fig:
        from . import plotting

        plotting.save_spline_figure(rows, o["n"], o["sigma"], fig)
    return 0


def _cmd_ladder(o: dict, out: Optional[str], fig: Optional[str]) -> int:
    rows, rate = experiments.ladder_table(o["n"], (o["rho_min"], o["rho_max"]), o["points"])
    header = ["n", "rho", "alpha_hat", "alpha_ladder", "alpha_bruteforce", "classes_agree"]
    tables.write_csv(out, header, (
        [o["n"], p.rho, p.alpha_hat, p.alpha_ladder, p.alpha_bruteforce, p.classes_agree]
        for p in rows
    ))
    print(f"ladder vs brute-force class agreement: {rate:.4f}", file=sys.stderr)
    if fig:
        from . import plotting

        plotting.save_ladder_figure(rows, o["n"], fig)
    return 0


def _cmd_sensitivity(o: dict, out: Optional[str], fig: Optional[str]) -> int:
    rows = experiments.sensitivity_table((o["rho_min"], o["rho_max"]), o["points"])
    header = ["rho", "alpha_hat", "minus_derivative", "matched_normal_density"]
    tables.write_csv(out, header, (
        [p.rho, p.alpha_hat, p.minus_derivative, p.matched_normal_density] for p in rows
    ))
    print(
        "matched_normal_density is phi(rho) scaled to equal minus_derivative at rho=0",
        file=sys.stderr,
    )
    if fig:
        from . import plotting

        plotting.save_sensitivity_figure(rows, fig)
    return 0


def _cmd_simulate(o: dict, out: Optional[str], fig: Optional[str]) -> int:
    mu = o["mu"] if o["mu"] is not None else o["rho"] * o["sigma"]
    env = Environment(mu=mu, sigma=o["sigma"])
    cfg = simulate.SimulationConfig(
        env=env,
        rule=VotingRule(n=o["n"], alpha=o["alpha"]),
        steps=o["steps"],
        trials=o["trials"],
        seed=o["seed"],
        initial_capital=o["initial_capital"],
        ruin_level=o["ruin_level"],
    )
    summary = simulate.run_simulation(cfg, workers=o["workers"])
    header = ["n", "sigma", "mu", "rho", "alpha", "steps", "trials", "seed",
              "mean_step_increment", "std_error", "acceptance_rate",
              "mean_final_capital", "ruined_count_mean", "gini_final"]
    tables.write_csv(out, header, [[
        o["n"], o["sigma"], mu, env.rho, o["alpha"], o["steps"], o["trials"], o["seed"],
        summary.mean_step_increment, summary.std_error, summary.acceptance_rate,
        summary.mean_final_capital, summary.ruined_count_mean, summary.gini_final,
    ]])
    return 0


def _cmd_verify(o: dict, out: Optional[str], fig: Optional[str]) -> int:
    report = experiments.verify(
        seed=o["seed"], budget=o["budget"], se_limit=o["se_limit"], workers=o["workers"]
    )
    text = "\n".join(report.lines()) + "\n"
    sys.stdout.write(text)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return 0 if report.passed else 1


_HANDLERS = {
    "sweep": _cmd_sweep,
    "pit": _cmd_pit,
    "spline": _cmd_spline,
    "ladder": _cmd_ladder,
    "sensitivity": _cmd_sensitivity,
    "simulate": _cmd_simulate,
    "verify": _cmd_verify,
}


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        options = _resolve(args)
        return _HANDLERS[args.command](options, args.out, getattr(args, "fig", None))
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
