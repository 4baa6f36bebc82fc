"""Per-step protocol: environment draws, adversary corrupts, agent pulls and observes.

The three parties never share state. The adversary sees every raw reward up to
and including the current step, past corruptions and past pulls; the agent sees
only the corrupted value of the arm it pulled. All randomness comes from three
independent generators, one per role, built from a seed triple.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Mapping, Optional, Protocol, Sequence

import numpy as np

from .core import BanditInstance

_MASK64 = (1 << 64) - 1

ROLE_ENV = 1
ROLE_AGENT = 2
ROLE_ADVERSARY = 3
ROLE_CELL = 4


class ProtocolError(RuntimeError):
    pass


class BudgetExceeded(ProtocolError):
    pass


class RangeViolation(ProtocolError):
    pass


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def mix_seed(*words: int) -> int:
    """Fold integers into one 64-bit seed with chained splitmix64.

    ``h = 0; for w in words: h = splitmix64(h ^ (w mod 2**64))``.
    """
    h = 0
    for w in words:
        h = splitmix64(h ^ (int(w) & _MASK64))
    return h


def trial_seeds(master_seed: int, trial_index: int) -> tuple[int, int, int]:
    """(environment, agent, adversary) seeds for one trial."""
    return (
        mix_seed(master_seed, trial_index, ROLE_ENV),
        mix_seed(master_seed, trial_index, ROLE_AGENT),
        mix_seed(master_seed, trial_index, ROLE_ADVERSARY),
    )


@dataclass
class CorruptionLedger:
    budget: float
    spent: float = 0.0
    per_step_costs: list[float] = field(default_factory=list)

    @property
    def remaining(self) -> float:
        return self.budget - self.spent

    def charge(self, t: int, cost: float) -> None:
        if cost > 0.0 and self.spent + cost > self.budget:
            raise BudgetExceeded(
                f"step {t}: cost {cost} would bring spend to {self.spent + cost} > C={self.budget}"
            )
        self.spent += cost
        self.per_step_costs.append(cost)


class AdversaryView:
    """What the adversary may look at when choosing the step-``t`` corruption.

    Histories are exposed lazily as read-only slices of the engine's storage; the
    pull history has exactly ``t - 1`` entries because the engine only asks the
    agent for ``i_t`` after the adversary has committed.
    """

    __slots__ = ("t", "remaining", "_raw", "_corruptions", "_pulled")

    def __init__(self, t, raw, corruptions, pulled, remaining):
        self.t = t
        self.remaining = remaining
        self._raw = raw
        self._corruptions = corruptions
        self._pulled = pulled

    @property
    def raw(self) -> np.ndarray:
        """Raw rewards of every arm at the current step."""
        return self._raw[self.t - 1]

    @property
    def raw_history(self) -> np.ndarray:
        """Raw rewards for steps 1..t, shape (t, L)."""
        return self._raw[: self.t]

    @property
    def corruption_history(self) -> Mapping[int, np.ndarray]:
        """Nonzero corruption vectors of steps 1..t-1, keyed by step."""
        return MappingProxyType(self._corruptions)

    @property
    def pulled_history(self) -> tuple[Optional[int], ...]:
        """Pulled arm (``None`` when idle) for steps 1..t-1."""
        return tuple(self._pulled)

    def pulled_at(self, s: int) -> Optional[int]:
        return self._pulled[s - 1]

    def observed_at(self, s: int) -> Optional[float]:
        """Value the agent saw at past step ``s``, reconstructed from raw + corruption."""
        arm = self._pulled[s - 1]
        if arm is None:
            return None
        value = float(self._raw[s - 1, arm])
        c = self._corruptions.get(s)
        if c is not None:
            value += float(c[arm])
        return value


class Agent(Protocol):
    name: str

    def reset(self, rng: np.random.Generator) -> None: ...

    def select(self, t: int) -> Optional[int]: ...

    def observe(self, t: int, arm: int, value: float) -> None: ...

    def recommend(self) -> int: ...


class Adversary(Protocol):
    name: str

    def reset(self, rng: np.random.Generator) -> None: ...

    def corrupt(self, view: AdversaryView) -> Optional[np.ndarray]:
        """Corruption vector for the current step; ``None`` means all zeros."""
        ...


@dataclass(frozen=True)
class RoundRecord:
    t: int
    raw: tuple[float, ...]
    corruption: tuple[float, ...]
    corrupted: tuple[float, ...]
    pulled: Optional[int]
    observed: Optional[float]
    cost: float
    spent: float


@dataclass(frozen=True)
class TrialResult:
    output: int
    best_arm: int
    success: bool
    gap_of_output: float
    budget_spent: float
    steps_used: int
    phase_pull_counts: tuple[tuple[int, ...], ...] = ()
    seeds: tuple[int, int, int] = (0, 0, 0)
    trace: Optional[tuple[RoundRecord, ...]] = None


def run_trial(
    instance: BanditInstance,
    agent: Agent,
    adversary: Adversary,
    T: int,
    C: float,
    seeds: Sequence[int],
    record: bool = False,
) -> TrialResult:
    """Play one horizon of the corrupted bandit protocol and return the outcome.

    Raw rewards for the whole horizon are drawn up front from the environment
    generator (row t is step t); this is equivalent to per-step draws and keeps
    the adversary and agent streams untouched by the environment.
    """
    if T < 1:
        raise ValueError(f"T must be positive, got {T}")
    if C < 0:
        raise ValueError(f"C must be nonnegative, got {C}")
    env_seed, agent_seed, adv_seed = (int(s) for s in seeds)
    L = instance.L
    env_rng = np.random.default_rng(env_seed)
    raw = (env_rng.random((T, L)) < instance.means_array).astype(np.float64)
    raw.flags.writeable = False

    agent.reset(np.random.default_rng(agent_seed))
    adversary.reset(np.random.default_rng(adv_seed))

    ledger = CorruptionLedger(budget=float(C))
    corruptions: dict[int, np.ndarray] = {}
    pulled: list[Optional[int]] = []
    records: list[RoundRecord] = []
    steps_used = 0
    zeros = np.zeros(L)

    for t in range(1, T + 1):
        row = raw[t - 1]
        c = adversary.corrupt(AdversaryView(t, raw, corruptions, pulled, ledger.remaining))
        if c is None:
            cost = 0.0
            corrupted = row
        else:
            c = np.asarray(c, dtype=np.float64)
            if c.shape != (L,):
                raise RangeViolation(f"step {t}: corruption has shape {c.shape}, expected ({L},)")
            cost = float(np.max(np.abs(c)))
            if cost > 1.0:
                raise RangeViolation(f"step {t}: |c| = {cost} exceeds 1")
            corrupted = row + c
            if corrupted.min() < 0.0 or corrupted.max() > 1.0:
                raise RangeViolation(f"step {t}: corrupted reward outside [0, 1]: {corrupted}")
            if cost > 0.0:
                c.flags.writeable = False
                corruptions[t] = c
        ledger.charge(t, cost)

        arm = agent.select(t)
        pulled.append(arm)
        observed = None
        if arm is not None:
            steps_used += 1
            observed = float(corrupted[arm])
            agent.observe(t, arm, observed)
        if record:
            records.append(
                RoundRecord(
                    t=t,
                    raw=tuple(row.tolist()),
                    corruption=tuple((c if c is not None else zeros).tolist()),
                    corrupted=tuple(corrupted.tolist()),
                    pulled=arm,
                    observed=observed,
                    cost=cost,
                    spent=ledger.spent,
                )
            )

    out = int(agent.recommend())
    counts = getattr(agent, "phase_pull_counts", ())
    return TrialResult(
        output=out,
        best_arm=instance.best_arm,
        success=out == instance.best_arm,
        gap_of_output=instance.gaps[out],
        budget_spent=ledger.spent,
        steps_used=steps_used,
        phase_pull_counts=tuple(tuple(int(x) for x in p) for p in counts),
        seeds=(env_seed, agent_seed, adv_seed),
        trace=tuple(records) if record else None,
    )


def replay_check(result_a: TrialResult, result_b: TrialResult) -> bool:
    """True iff two trial results agree on every recorded field."""
    return result_a == result_b


TRACE_COLUMNS = ("t", "pulled", "observed", "per_step_cost", "spent")


def write_trace_csv(result: TrialResult, path: str | Path) -> None:
    if result.trace is None:
        raise ValueError("trial was run without record=True; no trace to write")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for r in result.trace:
            w.writerow(
                [
                    r.t,
                    "" if r.pulled is None else r.pulled,
                    "" if r.observed is None else repr(r.observed),
                    repr(r.cost),
                    repr(r.spent),
                ]
            )
