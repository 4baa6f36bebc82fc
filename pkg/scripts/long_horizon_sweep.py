"""T sweeps at (L, lambda) in {(32, 9), (64, 19), (128, 39)} for PSS(2), SH and UP.

Long-running: the (128, 39) panel alone is about 1e8 simulated steps per
algorithm at 1000 trials. ``--settings 32:9`` restricts the run.
"""

import argparse
from pathlib import Path

from pssbai.reproduce import FIG_A1_SETTINGS, VARIANTS, fig_a1, run_panel


def _setting(text: str) -> tuple[int, float]:
    L, lam = text.split(":")
    return int(L), float(lam)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--variant", choices=tuple(VARIANTS), default="literal")
    ap.add_argument("--settings", nargs="+", type=_setting, default=list(FIG_A1_SETTINGS))
    ap.add_argument("--out", type=Path, default=Path("results/long_horizon"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for panel in fig_a1(args.trials, args.seed, args.variant, tuple(args.settings)):
        run_panel(panel, args.out, workers=args.workers)


if __name__ == "__main__":
    main()
