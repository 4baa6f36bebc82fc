"""How far can the comparison-table numbers move with the attack?

For the (lambda=0.5, w*=0.4, w'=0.2) instance at L=32, T=2000, runs all three
algorithms against:

  * no corruption,
  * the phase-1 SH attack with the theorem-4.3 budget (the literal setting),
  * the schedule-following attack with that budget multiplied by log2 L.

The first row bounds what any attack spending about 2.5 units can achieve
against Uniform Pull: each unit flips one observation.
"""

import argparse

from pssbai.harness import ExperimentConfig, run_sweep

SETTINGS = (
    ("no corruption", "noop", "none"),
    ("literal", "sh-schedule", "theorem-4.3"),
    ("strong", "schedule-all", "theorem-4.3-x-log2L"),
)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    print(f"{'setting':<14} {'C':>7} {'pss':>6} {'sh':>6} {'up':>6}")
    for label, adversary, rule in SETTINGS:
        cfg = ExperimentConfig(
            adversary=adversary, cps_rule=rule, trials=args.trials, master_seed=args.seed,
            L=32, T=2000, lam=0.5, w_star=0.4, w_prime=0.2, axes={"algorithm": ("pss", "sh", "up")},
        )
        rates = {s.algorithm: s for s in run_sweep(cfg)}
        C = rates["pss"].C
        print(f"{label:<14} {C:>7.2f} " + " ".join(f"{rates[a].success_rate:>6.3f}" for a in ("pss", "sh", "up")))


if __name__ == "__main__":
    main()
