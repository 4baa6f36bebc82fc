"""Reward-corruption strategies.

Every adversary is offline with respect to the agent's private randomness: it
sees raw rewards up to the current step, its own past corruptions and the past
pulls, plus the remaining budget. All of them only ever propose corruptions of
magnitude 1 and stop once less than one unit of budget is left, so they never
trip the engine's budget check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import BanditError, BanditInstance, pss_schedule, sh_schedule
from .engine import AdversaryView


class PreconditionViolated(BanditError):
    pass


@dataclass(frozen=True)
class AttackParams:
    lam: float
    delta: float
    target_arm: int
    budget: float


def coupling_budget(delta: float, T: int, lam: float) -> float:
    """Budget under which the coupling attack survives the horizon w.h.p.: 1 + (1+lam)*2*delta*T."""
    return 1.0 + (1.0 + lam) * 2.0 * delta * T


def sh_attack_budget(delta: float, T: int, L: int, lam: float) -> float:
    return (1.0 + lam) * 2.0 * delta * T / (L * math.log2(L))


def one_to_zero_threshold(instance: BanditInstance, T: int, lam: float) -> float:
    """Budget above which Strategy I keeps every observation at 0 w.h.p."""
    return instance.L * (1.0 - (1.0 - lam) * (1.0 - max(instance.means))) * T


def zero_to_one_threshold(instance: BanditInstance, T: int, lam: float) -> float:
    return instance.L * (1.0 - (1.0 - lam) * min(instance.means)) * T


class NoopAdversary:
    name = "noop"

    def reset(self, rng: np.random.Generator) -> None:
        pass

    def corrupt(self, view: AdversaryView) -> Optional[np.ndarray]:
        return None


class _BestArmThinning:
    """Shared core of the coupling-style attacks.

    On an attacked step where the best arm's raw reward is 1, an independent
    coin with success probability 2*delta/w_best turns it into 0 at a cost of
    one unit. The corrupted best-arm reward is then Bernoulli(w_best - 2*delta),
    i.e. Bernoulli(w_second - delta), for as long as at least one unit remains.
    """

    name = "thinning"

    def __init__(self, instance: BanditInstance, T: int, lam: float):
        self.instance = instance
        self.T = T
        self.lam = lam
        self.best = instance.best_arm
        self.delta = instance.delta
        w1 = instance.means[self.best]
        self.flip_prob = 2.0 * self.delta / w1 if w1 > 0 else 1.0
        if not (0.0 <= self.flip_prob <= 1.0):
            raise PreconditionViolated(
                f"2*delta/w_best = {self.flip_prob} is not a probability"
            )
        self._unit = np.zeros(instance.L)
        self._unit[self.best] = -1.0
        self._unit.flags.writeable = False

    def reset(self, rng: np.random.Generator) -> None:
        # one coin per step, drawn whether or not it is used
        self._coins = (rng.random(self.T) < self.flip_prob).tolist()

    def _attacked(self, view: AdversaryView) -> bool:
        return True

    def corrupt(self, view: AdversaryView) -> Optional[np.ndarray]:
        t = view.t
        if view.remaining < 1.0 or not self._coins[t - 1]:
            return None
        if view.raw[self.best] != 1.0 or not self._attacked(view):
            return None
        return self._unit


class CouplingAttack(_BestArmThinning):
    """Thin the best arm at every step until the budget runs out.

    This is the real-instance side of the two-instance coupling: while budget
    lasts, the best arm looks like a Bernoulli(w_2 - delta) arm, so the second
    best arm appears optimal.
    """

    name = "coupling"

    def __init__(self, instance: BanditInstance, T: int, lam: float):
        ranked = instance.sorted_means()
        delta = ranked[0] - ranked[1]
        third = ranked[2] if len(ranked) > 2 else -math.inf
        if not ranked[1] - delta > third:
            raise PreconditionViolated(
                f"need w2 - delta > w3, got w2={ranked[1]}, delta={delta}, w3={third}"
            )
        super().__init__(instance, T, lam)
        self.params = AttackParams(
            lam=lam, delta=delta, target_arm=self.best, budget=coupling_budget(delta, T, lam)
        )


class ScheduleAttack(_BestArmThinning):
    """Thin the best arm only at steps where a known agent will pull it.

    ``target`` names the agent being attacked. For the deterministic agents
    ("sh", "up") the attack precomputes the steps at which the best arm is
    pulled. PSS pulls at random, so against "pss" every step of an attacked
    phase is hit blindly. ``phases="first"`` restricts the attack to phase 1
    (the Successive Halving lower-bound construction); ``"all"`` follows the
    target through every phase, re-deriving the surviving SH arms from the
    pull history at each phase boundary.
    """

    name = "schedule"

    def __init__(
        self,
        instance: BanditInstance,
        T: int,
        lam: float,
        target: str = "sh",
        phases: str = "first",
        u: float = 2.0,
    ):
        super().__init__(instance, T, lam)
        if target not in ("sh", "up", "pss"):
            raise ValueError(f"unknown attack target {target!r}")
        if phases not in ("first", "all"):
            raise ValueError(f"phases must be 'first' or 'all', got {phases!r}")
        self.target = target
        self.phases = phases
        L = instance.L
        self.params = AttackParams(
            lam=lam,
            delta=self.delta,
            target_arm=self.best,
            budget=sh_attack_budget(self.delta, T, L, lam),
        )
        if target == "sh":
            self.sched = sh_schedule(L, T)
        elif target == "pss":
            self.sched = pss_schedule(L, T, u)
        else:
            self._up_block = T // L

    def reset(self, rng: np.random.Generator) -> None:
        super().reset(rng)
        self._sh_phase = 1
        self._sh_active = list(range(self.instance.L))

    def first_phase_steps(self) -> list[int]:
        """Steps (1-based) at which SH pulls the best arm during phase 1."""
        L = self.instance.L
        tau = self.sched.taus[0]
        return [self.best + 1 + j * L for j in range(tau)]

    def _attacked(self, view: AdversaryView) -> bool:
        t = view.t
        if self.target == "up":
            n = self._up_block
            return self.best * n < t <= (self.best + 1) * n
        if self.target == "pss":
            s = self.sched
            last = s.N if self.phases == "first" else s.N * s.M
            return t <= last
        return self._sh_pulls_best(view)

    def _sh_pulls_best(self, view: AdversaryView) -> bool:
        s = self.sched
        t = view.t
        m = (t - 1) // s.phase_length + 1
        if m > s.M or (self.phases == "first" and m > 1):
            return False
        while self._sh_phase < m:
            self._advance_sh(view)
        if self.best not in self._sh_active:
            return False
        k = len(self._sh_active)
        offset = t - (m - 1) * s.phase_length - 1
        if offset >= k * s.taus[m - 1]:
            return False
        return self._sh_active[offset % k] == self.best

    def _advance_sh(self, view: AdversaryView) -> None:
        # Replays SH's elimination from what the agent observed; on ties at the
        # cut the best arm is assumed to survive.
        s = self.sched
        m = self._sh_phase
        start, end = s.window(m)
        sums = {a: 0.0 for a in self._sh_active}
        for step in range(start, min(end, view.t - 1) + 1):
            arm = view.pulled_at(step)
            if arm is not None and arm in sums:
                sums[arm] += view.observed_at(step)
        keep = -(-len(self._sh_active) // 2)
        ranked = sorted(sums, key=lambda a: (-sums[a], a != self.best, a))
        self._sh_active = sorted(ranked[:keep])
        self._sh_phase += 1


def sh_schedule_attack(instance: BanditInstance, L: int, T: int, lam: float) -> ScheduleAttack:
    """The phase-1 Successive Halving attack."""
    if L != instance.L:
        raise ValueError(f"L={L} does not match the instance ({instance.L} arms)")
    attack = ScheduleAttack(instance, T, lam, target="sh", phases="first")
    attack.name = "sh-schedule"
    return attack


class OneToZeroAttack:
    """Strategy I: every raw reward equal to 1 is pushed to 0 while a unit of budget remains."""

    name = "one-to-zero"

    def __init__(self, instance: BanditInstance, T: int, lam: float):
        if not (0.0 < lam < 1.0):
            raise PreconditionViolated(f"lambda must lie in (0, 1), got {lam}")
        self.instance = instance
        self.threshold = one_to_zero_threshold(instance, T, lam)

    def reset(self, rng: np.random.Generator) -> None:
        pass

    def corrupt(self, view: AdversaryView) -> Optional[np.ndarray]:
        if view.remaining < 1.0:
            return None
        row = view.raw
        if not row.any():
            return None
        return -row


class ZeroToOneAttack:
    """Strategy II: every raw reward equal to 0 is pushed to 1 while a unit of budget remains."""

    name = "zero-to-one"

    def __init__(self, instance: BanditInstance, T: int, lam: float):
        if not (0.0 < lam < 1.0):
            raise PreconditionViolated(f"lambda must lie in (0, 1), got {lam}")
        self.instance = instance
        self.threshold = zero_to_one_threshold(instance, T, lam)

    def reset(self, rng: np.random.Generator) -> None:
        pass

    def corrupt(self, view: AdversaryView) -> Optional[np.ndarray]:
        if view.remaining < 1.0:
            return None
        c = 1.0 - view.raw
        if not c.any():
            return None
        return c


ADVERSARY_NAMES = ("noop", "coupling", "sh-schedule", "schedule-all", "one-to-zero", "zero-to-one")


def make_adversary(
    name: str,
    instance: BanditInstance,
    T: int,
    lam: float = 0.5,
    algorithm: str = "sh",
    u: float = 2.0,
):
    """Build an adversary by name.

    ``algorithm`` is the declared agent kind; only "schedule-all" uses it, to
    follow that agent's pull schedule through every phase.
    """
    if name == "noop":
        return NoopAdversary()
    if name == "coupling":
        return CouplingAttack(instance, T, lam)
    if name == "sh-schedule":
        return sh_schedule_attack(instance, instance.L, T, lam)
    if name == "schedule-all":
        attack = ScheduleAttack(instance, T, lam, target=algorithm, phases="all", u=u)
        attack.name = "schedule-all"
        return attack
    if name == "one-to-zero":
        return OneToZeroAttack(instance, T, lam)
    if name == "zero-to-one":
        return ZeroToOneAttack(instance, T, lam)
    raise ValueError(f"unknown adversary {name!r}; expected one of {ADVERSARY_NAMES}")

