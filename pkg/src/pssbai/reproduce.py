"""Built-in experiment suites: the comparison table, the four-panel figure and the long-horizon T sweeps.

Every suite is a list of :class:`Panel` objects. A panel groups one or more
sweep configs whose results go to the same CSV and SVG. Panels carry
reference percentages where they exist so that the CLI can print
them next to the measured values.

Two attack settings are available:

``literal``
    The phase-1 Successive Halving attack (``sh-schedule``) with the
    ``theorem-4.3`` budget, applied identically to every algorithm.
``strong``
    The ``schedule-all`` attack, which follows each deterministic agent's own
    pull schedule through every phase (and hits PSS blindly), with the budget
    multiplied by log2 L (``theorem-4.3-x-log2L``). Offered as a diagnostic;
    see the README for why it exists.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional

from .engine import mix_seed
from .harness import ExperimentConfig, ExperimentSummary, run_experiment, write_csv
from .plotting import plot_csv

ALGORITHMS = ("pss", "sh", "up")

VARIANTS = {
    "literal": ("sh-schedule", "theorem-4.3"),
    "strong": ("schedule-all", "theorem-4.3-x-log2L"),
}

# (lambda, w_star, w_prime) -> reference success percentages at L=32, T=2000
TABLE_A1: dict[tuple[float, float, float], dict[str, int]] = {
    (0.5, 0.4, 0.2): {"pss": 76, "sh": 42, "up": 12},
    (0.5, 0.5, 0.2): {"pss": 91, "sh": 64, "up": 13},
    (0.5, 0.5, 0.3): {"pss": 74, "sh": 51, "up": 19},
    (0.9, 0.4, 0.2): {"pss": 72, "sh": 45, "up": 9},
    (0.9, 0.5, 0.2): {"pss": 83, "sh": 64, "up": 7},
    (0.9, 0.5, 0.3): {"pss": 60, "sh": 40, "up": 12},
}

FIG_A1_SETTINGS = ((32, 9.0), (64, 19.0), (128, 39.0))
FIG_A1_T = (2000, 5000, 10000, 20000)
FIG4_L = (8, 16, 32, 64, 128)
FIG4_T = (1000, 2000, 5000, 10000)


@dataclass(frozen=True)
class Panel:
    name: str
    title: str
    configs: tuple[ExperimentConfig, ...]
    # reference percentage keyed by (algorithm, lambda, w_star, w_prime)
    reference: dict[tuple, int] = field(default_factory=dict)


def _base(trials: int, seed: int, variant: str, **kw) -> ExperimentConfig:
    adversary, rule = VARIANTS[variant]
    return ExperimentConfig(
        adversary=adversary,
        cps_rule=rule,
        trials=trials,
        master_seed=seed,
        u=2.0,
        axes={"algorithm": ALGORITHMS},
        **kw,
    )


def table_a1(trials: int, seed: int, variant: str = "literal") -> list[Panel]:
    configs = []
    reference = {}
    for r, ((lam, ws, wp), ref) in enumerate(TABLE_A1.items()):
        configs.append(
            _base(trials, mix_seed(seed, r), variant, L=32, T=2000, lam=lam, w_star=ws, w_prime=wp)
        )
        for alg, pct in ref.items():
            reference[(alg, lam, ws, wp)] = pct
    return [Panel("table-a1", "success rate, L=32, T=2000", tuple(configs), reference)]


def fig_4(trials: int, seed: int, variant: str = "literal") -> list[Panel]:
    panels = []
    for p, lam in (("a", 0.5), ("b", 0.9)):
        configs, reference = [], {}
        for r, ((lam_r, ws, wp), ref) in enumerate(TABLE_A1.items()):
            if lam_r != lam:
                continue
            configs.append(
                _base(trials, mix_seed(seed, ord(p), r), variant, L=32, T=2000, lam=lam, w_star=ws, w_prime=wp)
            )
            for alg, pct in ref.items():
                reference[(alg, lam, ws, wp)] = pct
        panels.append(
            Panel(f"fig-4{p}", f"lambda={lam}, instances (0.4,0.2) (0.5,0.2) (0.5,0.3)", tuple(configs), reference)
        )
    cfg_c = _base(trials, mix_seed(seed, ord("c")), variant, T=2000, lam=0.5, w_star=0.4, w_prime=0.2)
    cfg_c = replace(cfg_c, axes={"algorithm": ALGORITHMS, "L": FIG4_L})
    panels.append(Panel("fig-4c", "effect of L (T=2000, lambda=0.5)", (cfg_c,)))
    cfg_d = _base(trials, mix_seed(seed, ord("d")), variant, L=32, lam=0.5, w_star=0.4, w_prime=0.2)
    cfg_d = replace(cfg_d, axes={"algorithm": ALGORITHMS, "T": FIG4_T})
    panels.append(Panel("fig-4d", "effect of T (L=32, lambda=0.5)", (cfg_d,)))
    return panels


def fig_a1(
    trials: int,
    seed: int,
    variant: str = "literal",
    settings: tuple[tuple[int, float], ...] = FIG_A1_SETTINGS,
) -> list[Panel]:
    panels = []
    for L, lam in settings:
        cfg = _base(trials, mix_seed(seed, L), variant, L=L, lam=lam, w_star=0.4, w_prime=0.2)
        cfg = replace(cfg, axes={"algorithm": ALGORITHMS, "T": FIG_A1_T})
        panels.append(Panel(f"fig-a1-L{L}", f"L={L}, lambda={lam:g}", (cfg,)))
    return panels


SUITES: dict[str, Callable[..., list[Panel]]] = {
    "table-a1": table_a1,
    "fig-4": fig_4,
    "fig-a1": fig_a1,
}


def lookup_reference(panel: Panel, s: ExperimentSummary) -> Optional[int]:
    return panel.reference.get((s.algorithm, s.lam, s.w_star, s.w_prime))


def run_panel(panel: Panel, out_dir: Path, workers: int = 1, log=None) -> list[ExperimentSummary]:
    """Run the panel's cells, then write its CSV and SVG.

    Each cell's config (with its derived master seed) is written to
    ``configs/<panel>-<k>.toml``; running that file alone reproduces row ``k``
    of the panel CSV exactly.
    """
    log = log or (lambda msg: print(msg, file=sys.stdout))
    cfg_dir = out_dir / "configs"
    cfg_dir.mkdir(parents=True, exist_ok=True)
    cells = [cell for cfg in panel.configs for cell in cfg.expand()]
    summaries: list[ExperimentSummary] = []
    for k, cell in enumerate(cells):
        (cfg_dir / f"{panel.name}-{k:02d}.toml").write_text(cell.to_toml(), encoding="utf-8")
        summaries.append(run_experiment(cell, workers=workers))
    csv_path = out_dir / f"{panel.name}.csv"
    write_csv(summaries, csv_path)
    plot_csv(csv_path, out_dir / f"{panel.name}.svg", title=panel.title)
    log(format_panel(panel, summaries))
    return summaries


def format_panel(panel: Panel, summaries: list[ExperimentSummary]) -> str:
    lines = [f"== {panel.name}: {panel.title}"]
    header = f"{'algorithm':>9} {'L':>4} {'T':>6} {'lambda':>6} {'w*':>5} {'w_prime':>7} {'C':>9} {'measured %':>10} {'95% CI':>13} {'reference %':>11}"
    lines.append(header)
    for s in summaries:
        ref = lookup_reference(panel, s)
        lines.append(
            f"{s.algorithm:>9} {s.L:>4} {s.T:>6} {s.lam:>6g} {s.w_star:>5g} {s.w_prime:>7g} "
            f"{s.C:>9.3f} {100 * s.success_rate:>10.1f} "
            f"{f'[{100 * s.ci_low:.1f},{100 * s.ci_high:.1f}]':>13} "
            f"{'' if ref is None else ref:>11}"
        )
    return "\n".join(lines)


def run_suite(
    name: str,
    out_dir: str | Path,
    trials: int = 1000,
    seed: int = 0,
    variant: str = "literal",
    workers: int = 1,
    log=None,
) -> dict[str, list[ExperimentSummary]]:
    if name not in SUITES:
        raise ValueError(f"unknown reproduction {name!r}; expected one of {tuple(SUITES)}")
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {tuple(VARIANTS)}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return {
        p.name: run_panel(p, out, workers=workers, log=log)
        for p in SUITES[name](trials, seed, variant)
    }
