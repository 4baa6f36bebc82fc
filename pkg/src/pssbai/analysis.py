"""Hardness measures, PSS(u) guarantees and corruption-per-step regimes."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .core import BanditInstance, InvalidU, num_phases, pss_schedule
from .engine import mix_seed, run_trial, trial_seeds
from .adversaries import NoopAdversary
from .agents import PSSAgent

REGIMES = ("BAI-guaranteed", "intermediate", "vacuous")


def _ranked_gaps(instance: BanditInstance) -> list[float]:
    return instance.ranked_gaps()


def h2(instance: BanditInstance) -> float:
    """max over ranks i >= 2 of i / gap_i^2, arms ranked by descending mean."""
    gaps = _ranked_gaps(instance)
    return max(i / gaps[i - 1] ** 2 for i in range(2, instance.L + 1))


def h2_tilde(instance: BanditInstance, u: float) -> float:
    """Like :func:`h2` with the rank replaced by min(u * i, L)."""
    L = instance.L
    if not (1.0 < u <= L):
        raise InvalidU(f"u must lie in (1, L={L}], got {u}")
    gaps = _ranked_gaps(instance)
    return max(min(u * i, L) / gaps[i - 1] ** 2 for i in range(2, L + 1))


@dataclass(frozen=True)
class Guarantee:
    epsilon_c: float
    delta_bound: float
    h2: float
    h2_tilde: float


def pss_guarantee(instance: BanditInstance, T: int, u: float, C: float) -> Guarantee:
    """Gap bound 8*C*M/T and failure-probability bound for PSS(u).

    The probability bound is 4*M*(L-1)*exp(-floor(T/M) / (192 * h2_tilde)),
    clipped to 1.
    """
    sched = pss_schedule(instance.L, T, u)
    M = sched.M
    ht = h2_tilde(instance, u)
    raw_delta = 4 * M * (instance.L - 1) * math.exp(-sched.N / (192.0 * ht))
    return Guarantee(
        epsilon_c=8.0 * C * M / T,
        delta_bound=min(1.0, raw_delta),
        h2=h2(instance),
        h2_tilde=ht,
    )


@dataclass(frozen=True)
class CpsRegime:
    cps: float
    low_threshold: float
    vacuous_threshold: float
    extreme_threshold: float
    classification: str


def cps_regime(instance: BanditInstance, u: float, C: float, T: int) -> CpsRegime:
    M = num_phases(instance.L, u)
    low = instance.delta / (8 * M)
    vac = instance.max_gap / (8 * M)
    cps = C / T
    if cps < low:
        label = "BAI-guaranteed"
    elif cps >= vac:
        label = "vacuous"
    else:
        label = "intermediate"
    return CpsRegime(
        cps=cps,
        low_threshold=low,
        vacuous_threshold=vac,
        extreme_threshold=instance.max_gap / 8,
        classification=label,
    )


@dataclass(frozen=True)
class ComparisonRow:
    algorithm: str
    epsilon_order: float
    delta_order: float


def comparison_table(
    instance: BanditInstance, T: int, C: float, u: float = 2.0
) -> list[ComparisonRow]:
    """Order-of-magnitude (epsilon, delta) guarantees of five algorithms, evaluated numerically.

    Logarithms here are real-valued (no ceiling) and the delta column is not
    clipped: these are rates, not probabilities.
    """
    L = instance.L
    log_u = math.log(L) / math.log(u)
    log_2 = math.log2(L)
    d12 = instance.delta
    delta_u = L * log_u * math.exp(-T / (192 * h2_tilde(instance, u) * log_u))
    delta_2 = L * log_2 * math.exp(-T / (192 * h2_tilde(instance, 2.0) * log_2))
    delta_L = L * math.exp(-T / (192 * L / d12**2))
    return [
        ComparisonRow(f"PSS({u:g})", C * log_u / T, delta_u),
        ComparisonRow("PSS(2)", C * log_2 / T, delta_2),
        ComparisonRow("SH", C * L * log_2 / T, delta_2),
        ComparisonRow("PSS(L)", C / T, delta_L),
        ComparisonRow("UP", C * L / T, delta_L),
    ]


@dataclass(frozen=True)
class EventRate:
    a: float
    phase: int
    arm: int
    n_expected: float
    active_trials: int
    upper_violations: int
    lower_violations: int
    bound: float

    @property
    def upper_rate(self) -> float:
        return self.upper_violations / self.active_trials if self.active_trials else 0.0

    @property
    def lower_rate(self) -> float:
        return self.lower_violations / self.active_trials if self.active_trials else 0.0


def lemma52_event_rate(
    instance: BanditInstance,
    u: float,
    T: int,
    a: float | Sequence[float],
    trials: int,
    seed: int = 0,
) -> list[EventRate]:
    """Empirical frequency of PSS estimates leaving their concentration band.

    Runs PSS(u) without corruption ``trials`` times and, for each phase and
    each arm active in it, counts how often the phase estimate satisfies
    est >= w + 2a (upper) or est <= w - 2a (lower). Each count is reported next
    to the bound 2*exp(-a^2 * n_m / 3), where n_m is the expected pull count.
    With no corruption the corruption term of the band is zero.
    """
    a_values: list[float] = [a] if isinstance(a, (int, float)) else list(a)
    sched = pss_schedule(instance.L, T, u)
    means = instance.means
    active_n: dict[tuple[int, int], int] = {}
    up: dict[tuple[float, int, int], int] = {}
    lo: dict[tuple[float, int, int], int] = {}
    for k in range(trials):
        agent = PSSAgent(instance.L, T, u)
        run_trial(instance, agent, NoopAdversary(), T, 0.0, trial_seeds(mix_seed(seed, 52), k))
        for rec in agent.history:
            m = rec["phase"]
            for arm, est in rec["estimates"].items():
                active_n[(m, arm)] = active_n.get((m, arm), 0) + 1
                for av in a_values:
                    key = (av, m, arm)
                    if est >= means[arm] + 2 * av:
                        up[key] = up.get(key, 0) + 1
                    if est <= means[arm] - 2 * av:
                        lo[key] = lo.get(key, 0) + 1
    out = []
    for av in a_values:
        for (m, arm), n_active in sorted(active_n.items()):
            n_m = sched.n(m)
            out.append(
                EventRate(
                    a=av,
                    phase=m,
                    arm=arm,
                    n_expected=n_m,
                    active_trials=n_active,
                    upper_violations=up.get((av, m, arm), 0),
                    lower_violations=lo.get((av, m, arm), 0),
                    bound=deviation_bound(av, n_m),
                )
            )
    return out


def deviation_bound(a: float, n_m: float) -> float:
    return 2.0 * math.exp(-(a**2) * n_m / 3.0)
