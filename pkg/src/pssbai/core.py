"""Bandit instances, phase schedules and the error types shared across the package."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

# Slack used when a ratio that is an integer in exact arithmetic is rounded up.
_CEIL_EPS = 1e-9


class BanditError(ValueError):
    """Base class for invalid problem definitions."""


class NonUniqueBest(BanditError):
    pass


class OutOfRange(BanditError):
    pass


class TooFewArms(BanditError):
    pass


class InvalidInstance(BanditError):
    pass


class InvalidU(BanditError):
    pass


class HorizonTooShort(BanditError):
    pass


def _ceil(x: float) -> int:
    return math.ceil(x - _CEIL_EPS * max(1.0, abs(x)))


@dataclass(frozen=True)
class BanditInstance:
    """Bernoulli arms identified by position; ``best_arm`` is the unique argmax."""

    means: tuple[float, ...]
    best_arm: int
    gaps: tuple[float, ...]

    @property
    def L(self) -> int:
        return len(self.means)

    @property
    def means_array(self) -> np.ndarray:
        return np.asarray(self.means, dtype=np.float64)

    def ranked_arms(self) -> list[int]:
        """Arms by descending mean; ties keep input order."""
        return sorted(range(self.L), key=lambda i: (-self.means[i], i))

    def ranked_gaps(self) -> list[float]:
        return [self.gaps[i] for i in self.ranked_arms()]

    @property
    def delta(self) -> float:
        """Gap between the best and the second best arm."""
        return self.ranked_gaps()[1]

    @property
    def max_gap(self) -> float:
        return max(self.gaps)

    def sorted_means(self) -> list[float]:
        return [self.means[i] for i in self.ranked_arms()]


def make_instance(means: Sequence[float]) -> BanditInstance:
    values = tuple(float(m) for m in means)
    if len(values) < 2:
        raise TooFewArms(f"need at least 2 arms, got {len(values)}")
    for i, m in enumerate(values):
        if not (0.0 <= m <= 1.0) or math.isnan(m):
            raise OutOfRange(f"mean of arm {i} is {m}, outside [0, 1]")
    top = max(values)
    winners = [i for i, m in enumerate(values) if m == top]
    if len(winners) > 1:
        raise NonUniqueBest(f"maximum mean {top} attained by arms {winners}")
    best = winners[0]
    gaps = tuple(top - m for m in values)
    return BanditInstance(means=values, best_arm=best, gaps=gaps)


def two_group_instance(L: int, w_star: float, w_prime: float) -> BanditInstance:
    """One best arm, one arm a third of the way down, and L-2 arms at ``w_prime``.

    The arm order is ``[w_star, w_star - delta, w_prime, ..., w_prime]`` with
    ``delta = (w_star - w_prime) / 3``.
    """
    if L < 3:
        raise InvalidInstance(f"L must be at least 3, got {L}")
    if not (0.0 < w_prime < w_star <= 1.0):
        raise InvalidInstance(
            f"need 0 < w_prime < w_star <= 1, got w_star={w_star}, w_prime={w_prime}"
        )
    delta = (w_star - w_prime) / 3.0
    return make_instance([w_star, w_star - delta] + [w_prime] * (L - 2))


def num_phases(L: int, u: float) -> int:
    """Smallest integer M with u**M >= L, i.e. ceil(log_u L)."""
    if L < 2:
        raise TooFewArms(f"need at least 2 arms, got {L}")
    if not (1.0 < u <= L):
        raise InvalidU(f"u must lie in (1, L={L}], got {u}")
    m = max(1, _ceil(math.log(L) / math.log(u)))
    while m > 1 and u ** (m - 1) >= L:
        m -= 1
    while u**m < L * (1 - 1e-12):
        m += 1
    return m


@dataclass(frozen=True)
class PhaseSchedule:
    """Phase layout of PSS(u): M phases of N steps, keeping ceil(L/u^m) arms."""

    L: int
    T: int
    u: float
    M: int
    N: int
    active_sizes: tuple[int, ...]

    def q(self, m: int) -> float:
        """Per-step pull probability of each active arm in phase ``m`` (1-based)."""
        return 1.0 / self.active_sizes[m - 1]

    def n(self, m: int) -> float:
        """Expected pulls per active arm in phase ``m``; deliberately not rounded."""
        return self.N / self.active_sizes[m - 1]

    def window(self, m: int) -> tuple[int, int]:
        """First and last step (1-based, inclusive) of phase ``m``."""
        return (m - 1) * self.N + 1, m * self.N

    @property
    def steps_used(self) -> int:
        return self.N * self.M


def pss_schedule(L: int, T: int, u: float) -> PhaseSchedule:
    M = num_phases(L, u)
    N = T // M
    if N == 0:
        raise HorizonTooShort(f"T={T} leaves no step per phase for M={M} phases")
    sizes = tuple([L] + [_ceil(L / u**m) for m in range(1, M + 1)])
    return PhaseSchedule(L=L, T=T, u=float(u), M=M, N=N, active_sizes=sizes)


@dataclass(frozen=True)
class SHSchedule:
    """Successive Halving layout: each active arm is pulled ``taus[m-1]`` times in phase m."""

    L: int
    T: int
    M: int
    phase_length: int
    taus: tuple[int, ...]
    active_sizes: tuple[int, ...]

    def window(self, m: int) -> tuple[int, int]:
        return (m - 1) * self.phase_length + 1, m * self.phase_length


def sh_schedule(L: int, T: int) -> SHSchedule:
    if L < 2:
        raise TooFewArms(f"need at least 2 arms, got {L}")
    M = num_phases(L, 2.0)
    sizes = [L]
    for _ in range(M):
        sizes.append(-(-sizes[-1] // 2))
    taus = tuple(T // (M * k) for k in sizes[:-1])
    if min(taus) == 0:
        raise HorizonTooShort(f"T={T} gives some phase zero pulls per arm (taus={taus})")
    return SHSchedule(
        L=L, T=T, M=M, phase_length=T // M, taus=taus, active_sizes=tuple(sizes)
    )
