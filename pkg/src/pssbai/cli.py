"""Command-line entry point.

Subcommands: ``run``, ``sweep``, ``analyze``, ``reproduce`` and ``plot``.
Exit status is 0 on success, 1 on a usage or configuration error and 2 on any
runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

from .analysis import comparison_table, cps_regime, h2, h2_tilde, pss_guarantee
from .core import make_instance, two_group_instance
from .harness import (
    CPS_RULES,
    ConfigError,
    ExperimentSummary,
    budget_from_rule,
    config_from_dict,
    read_config_dict,
    run_experiment,
    run_sweep,
    write_csv,
    write_trials_csv,
)
from .plotting import plot_csv
from .reproduce import SUITES, VARIANTS, run_suite

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse exits with 2 by default
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# flag dest -> config key
_FLAG_KEYS = {
    "algorithm": "algorithm",
    "adversary": "adversary",
    "trials": "trials",
    "seed": "master_seed",
    "u": "u",
    "lam": "lambda",
    "L": "L",
    "T": "T",
    "w_star": "w_star",
    "w_prime": "w_prime",
    "C": "C",
    "cps_rule": "cps_rule",
    "means": "means",
}


def _add_instance_flags(p: argparse.ArgumentParser, multi: bool) -> None:
    nargs = "+" if multi else None
    p.add_argument("--L", type=int, nargs=nargs, help="number of arms (two-group instance)")
    p.add_argument("--w-star", dest="w_star", type=float, nargs=nargs, help="best-arm mean")
    p.add_argument("--w-prime", dest="w_prime", type=float, nargs=nargs, help="mean of the L-2 low arms")
    p.add_argument("--means", type=float, nargs="+", help="explicit arm means (instead of L/w-star/w-prime)")


def _add_experiment_flags(p: argparse.ArgumentParser, multi: bool) -> None:
    nargs = "+" if multi else None
    p.add_argument("--config", type=Path, help="TOML config file; flags override its keys")
    p.add_argument("--out", type=Path, default=Path("results"), help="output directory")
    p.add_argument("--algorithm", nargs=nargs, help="pss, sh or up")
    p.add_argument("--adversary", help="noop, coupling, sh-schedule, schedule-all, one-to-zero, zero-to-one")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--u", type=float, help="PSS elimination rate")
    p.add_argument("--lambda", dest="lam", type=float, nargs=nargs)
    p.add_argument("--T", type=int, nargs=nargs, help="horizon")
    p.add_argument("--C", type=float, help="corruption budget (instead of --cps-rule)")
    p.add_argument("--cps-rule", dest="cps_rule", choices=CPS_RULES)
    p.add_argument("--workers", type=int, default=1, help="worker processes for trials")
    _add_instance_flags(p, multi)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pssbai", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_run = sub.add_parser("run", help="run one experiment")
    _add_experiment_flags(p_run, multi=False)
    p_run.add_argument("--per-trial", action="store_true", help="also write trials.csv")

    p_sweep = sub.add_parser("sweep", help="run a grid of experiments")
    _add_experiment_flags(p_sweep, multi=True)

    p_an = sub.add_parser("analyze", help="hardness, guarantees and regime of an instance")
    _add_instance_flags(p_an, multi=False)
    p_an.add_argument("--u", type=float, default=2.0)
    p_an.add_argument("--T", type=int, required=True)
    p_an.add_argument("--C", type=float)
    p_an.add_argument("--cps-rule", dest="cps_rule", choices=CPS_RULES)
    p_an.add_argument("--lambda", dest="lam", type=float, default=0.5)
    p_an.add_argument("--out", type=Path, help="directory for analysis.csv and comparison.csv")

    p_rep = sub.add_parser("reproduce", help="run a built-in experiment suite")
    p_rep.add_argument("name", choices=tuple(SUITES))
    p_rep.add_argument("--out", type=Path, default=Path("results"))
    p_rep.add_argument("--trials", type=int, default=1000)
    p_rep.add_argument("--seed", type=int, default=0)
    p_rep.add_argument("--workers", type=int, default=1)
    p_rep.add_argument(
        "--variant",
        choices=tuple(VARIANTS),
        default="literal",
        help="attack setting: literal (sh-schedule, theorem-4.3) or strong (schedule-all, x log2 L)",
    )

    p_plot = sub.add_parser("plot", help="SVG chart of a results CSV")
    p_plot.add_argument("csv", type=Path)
    p_plot.add_argument("svg", type=Path)
    p_plot.add_argument("--title", default="")
    return parser


def _config_dict(args: argparse.Namespace) -> dict[str, Any]:
    raw: dict[str, Any] = dict(read_config_dict(args.config)) if args.config else {}
    for dest, key in _FLAG_KEYS.items():
        v = getattr(args, dest, None)
        if v is None:
            continue
        raw[key] = list(v) if isinstance(v, (list, tuple)) else v
    if args.means is not None:
        for k in ("L", "w_star", "w_prime"):
            if k in raw and getattr(args, k) is None:
                del raw[k]
    elif any(getattr(args, k) is not None for k in ("L", "w_star", "w_prime")):
        raw.pop("means", None)
    if args.C is not None:
        raw.pop("cps_rule", None)
    elif args.cps_rule is not None:
        raw.pop("C", None)
    return raw


def _summary_line(s: ExperimentSummary) -> str:
    return (
        f"{s.algorithm} vs {s.adversary}: L={s.L} T={s.T} lambda={s.lam:g} C={s.C:.4g} "
        f"success {s.successes}/{s.trials} = {s.success_rate:.3f} "
        f"[{s.ci_low:.3f}, {s.ci_high:.3f}] mean gap {s.mean_gap:.4f} "
        f"spent {s.mean_budget_spent:.3f} hash {s.config_hash}"
    )


def cmd_run(args: argparse.Namespace) -> int:
    cfg = config_from_dict(_config_dict(args))
    if cfg.axes:
        raise UsageError("config has sweep axes (list values); use the sweep subcommand")
    summary = run_experiment(cfg, workers=args.workers)
    args.out.mkdir(parents=True, exist_ok=True)
    write_csv([summary], args.out / "results.csv")
    if args.per_trial:
        write_trials_csv(summary, args.out / "trials.csv")
    print(_summary_line(summary))
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = config_from_dict(_config_dict(args))
    summaries = run_sweep(cfg, workers=args.workers)
    args.out.mkdir(parents=True, exist_ok=True)
    write_csv(summaries, args.out / "results.csv")
    for s in summaries:
        print(_summary_line(s))
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace) -> int:
    if args.means is not None:
        inst = make_instance(args.means)
    elif None not in (args.L, args.w_star, args.w_prime):
        inst = two_group_instance(args.L, args.w_star, args.w_prime)
    else:
        raise UsageError("give --means or all of --L, --w-star, --w-prime")
    if args.C is not None and args.cps_rule is not None:
        raise UsageError("give at most one of --C and --cps-rule")
    C = args.C if args.C is not None else 0.0
    if args.cps_rule is not None:
        C = budget_from_rule(args.cps_rule, inst, args.T, args.lam)

    g = pss_guarantee(inst, args.T, args.u, C)
    reg = cps_regime(inst, args.u, C, args.T)
    quantities = [
        ("L", inst.L),
        ("T", args.T),
        ("u", args.u),
        ("C", C),
        ("H2", h2(inst)),
        ("H2_tilde", h2_tilde(inst, args.u)),
        ("epsilon_C", g.epsilon_c),
        ("delta_bound", g.delta_bound),
        ("CPS", reg.cps),
        ("CPS_low_threshold", reg.low_threshold),
        ("CPS_vacuous_threshold", reg.vacuous_threshold),
        ("CPS_extreme_threshold", reg.extreme_threshold),
        ("regime", reg.classification),
    ]
    width = max(len(k) for k, _ in quantities)
    for k, v in quantities:
        shown = f"{v:.6g}" if isinstance(v, float) else str(v)
        print(f"{k:<{width}}  {shown}")
    rows = comparison_table(inst, args.T, C, args.u)
    print()
    print(f"{'algorithm':<10} {'epsilon order':>14} {'delta order':>14}")
    for r in rows:
        print(f"{r.algorithm:<10} {r.epsilon_order:>14.6g} {r.delta_order:>14.6g}")
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        with open(args.out / "analysis.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("quantity", "value"))
            for k, v in quantities:
                w.writerow((k, repr(v) if isinstance(v, float) else v))
        with open(args.out / "comparison.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("algorithm", "epsilon_order", "delta_order"))
            for r in rows:
                w.writerow((r.algorithm, repr(r.epsilon_order), repr(r.delta_order)))
    return EXIT_OK


def cmd_reproduce(args: argparse.Namespace) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    run_suite(
        args.name, args.out, trials=args.trials, seed=args.seed, variant=args.variant, workers=args.workers
    )
    print(f"wrote configs, CSVs and SVGs to {args.out}")
    return EXIT_OK


def cmd_plot(args: argparse.Namespace) -> int:
    plot_csv(args.csv, args.svg, title=args.title)
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "analyze": cmd_analyze,
    "reproduce": cmd_reproduce,
    "plot": cmd_plot,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError) as err:
        print(f"pssbai {args.command}: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as err:
        print(f"pssbai {args.command}: error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
