"""Run the L=32, T=2000 comparison table under one or both attack settings.

    python scripts/reproduce_table.py --trials 1000 --variant literal strong
"""

import argparse
from pathlib import Path

from pssbai.reproduce import VARIANTS, run_suite


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--variant", nargs="+", choices=tuple(VARIANTS), default=["literal"])
    ap.add_argument("--out", type=Path, default=Path("results/table"))
    args = ap.parse_args()
    for v in args.variant:
        run_suite("table-a1", args.out / v, trials=args.trials, seed=args.seed, variant=v, workers=args.workers)


if __name__ == "__main__":
    main()
