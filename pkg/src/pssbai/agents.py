"""Fixed-budget best-arm identification agents: PSS(u), Successive Halving, Uniform Pull.

All three share the engine's agent interface (``reset``, ``select``,
``observe``, ``recommend``). ``select`` returns ``None`` on idle steps.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .core import HorizonTooShort, pss_schedule, sh_schedule


def top_k(values: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Indices of the ``k`` largest values, ties broken uniformly at random."""
    values = np.asarray(values, dtype=np.float64)
    perm = rng.permutation(len(values))
    order = perm[np.argsort(-values[perm], kind="stable")]
    return order[:k]


class _PhasedAgent:
    """Bookkeeping shared by the two elimination agents."""

    name = "phased"

    def __init__(self, L: int, T: int):
        self.L = L
        self.T = T
        self.rng: Optional[np.random.Generator] = None

    def reset(self, rng: np.random.Generator) -> None:
        self.rng = rng
        self.phase = 1
        self.active = list(range(self.L))
        self.sums = np.zeros(self.L)
        self.counts = np.zeros(self.L, dtype=np.int64)
        self.phase_pull_counts: list[np.ndarray] = []
        self.history: list[dict] = []
        self._start_phase()

    def _start_phase(self) -> None:
        pass

    def _phase_end(self, m: int) -> int:
        raise NotImplementedError

    def _estimates(self, m: int) -> np.ndarray:
        raise NotImplementedError

    def _keep(self, m: int) -> int:
        raise NotImplementedError

    @property
    def n_phases(self) -> int:
        raise NotImplementedError

    def _sync(self, t: int) -> None:
        while self.phase <= self.n_phases and t > self._phase_end(self.phase):
            self._end_phase()

    def _end_phase(self) -> None:
        m = self.phase
        idx = np.asarray(self.active)
        est = self._estimates(m)[idx]
        kept = idx[top_k(est, self._keep(m), self.rng)]
        self.history.append(
            {
                "phase": m,
                "active": tuple(self.active),
                "estimates": dict(zip(self.active, est.tolist())),
                "pulls": dict(zip(self.active, self.counts[idx].tolist())),
            }
        )
        self.phase_pull_counts.append(self.counts.copy())
        self.active = sorted(int(i) for i in kept)
        self.sums[:] = 0.0
        self.counts[:] = 0
        self.phase += 1
        if self.phase <= self.n_phases:
            self._start_phase()

    def observe(self, t: int, arm: int, value: float) -> None:
        self.sums[arm] += value
        self.counts[arm] += 1

    def recommend(self) -> int:
        while self.phase <= self.n_phases:
            self._end_phase()
        (arm,) = self.active
        return arm


class PSSAgent(_PhasedAgent):
    """Probabilistic Sequential Shrinking with elimination rate ``u``.

    In phase m every step pulls an arm drawn uniformly from the active set.
    At the end of the phase each active arm is scored by its observed reward sum
    divided by the *expected* pull count N/|A|, and the ceil(L/u^m) best survive.
    Steps after the last phase are idle.
    """

    name = "pss"

    def __init__(self, L: int, T: int, u: float = 2.0):
        super().__init__(L, T)
        self.schedule = pss_schedule(L, T, u)
        self.u = self.schedule.u

    @property
    def n_phases(self) -> int:
        return self.schedule.M

    def _start_phase(self) -> None:
        # one draw per step of the phase, taken from the agent's own stream
        k = len(self.active)
        self._choices = self.rng.integers(0, k, size=self.schedule.N).tolist()

    def _phase_end(self, m: int) -> int:
        return m * self.schedule.N

    def _estimates(self, m: int) -> np.ndarray:
        return self.sums / self.schedule.n(m)

    def _keep(self, m: int) -> int:
        return self.schedule.active_sizes[m]

    def select(self, t: int) -> Optional[int]:
        self._sync(t)
        if self.phase > self.schedule.M:
            return None
        offset = t - (self.phase - 1) * self.schedule.N - 1
        return self.active[self._choices[offset]]


class SHAgent(_PhasedAgent):
    """Successive Halving with a public deterministic schedule.

    Phase m lasts floor(T/M) steps. Within it, step offset ``o`` pulls the
    ``o mod |A|``-th active arm in ascending id order for ``o < |A| * tau_m``;
    the rest of the phase is idle. Survivors are the top half by mean over the
    ``tau_m`` realized pulls.
    """

    name = "sh"

    def __init__(self, L: int, T: int):
        super().__init__(L, T)
        self.schedule = sh_schedule(L, T)

    @property
    def n_phases(self) -> int:
        return self.schedule.M

    def _phase_end(self, m: int) -> int:
        return m * self.schedule.phase_length

    def _estimates(self, m: int) -> np.ndarray:
        return self.sums / self.schedule.taus[m - 1]

    def _keep(self, m: int) -> int:
        return -(-len(self.active) // 2)

    def select(self, t: int) -> Optional[int]:
        self._sync(t)
        if self.phase > self.schedule.M:
            return None
        k = len(self.active)
        offset = t - (self.phase - 1) * self.schedule.phase_length - 1
        if offset >= k * self.schedule.taus[self.phase - 1]:
            return None
        return self.active[offset % k]


class UPAgent:
    """Uniform Pull: arm 0 for floor(T/L) steps, then arm 1, and so on; recommend the empirical argmax."""

    name = "up"

    def __init__(self, L: int, T: int):
        self.L = L
        self.T = T
        self.n = T // L
        if self.n < 1:
            raise HorizonTooShort(f"T={T} < L={L}: Uniform Pull cannot pull every arm")
        self.rng: Optional[np.random.Generator] = None

    def reset(self, rng: np.random.Generator) -> None:
        self.rng = rng
        self.sums = np.zeros(self.L)
        self.counts = np.zeros(self.L, dtype=np.int64)

    @property
    def phase_pull_counts(self) -> list[np.ndarray]:
        return [self.counts]

    def select(self, t: int) -> Optional[int]:
        if t > self.L * self.n:
            return None
        return (t - 1) // self.n

    def observe(self, t: int, arm: int, value: float) -> None:
        self.sums[arm] += value
        self.counts[arm] += 1

    def recommend(self) -> int:
        return int(top_k(self.sums / self.n, 1, self.rng)[0])


AGENT_NAMES = ("pss", "sh", "up")


def make_agent(name: str, L: int, T: int, u: float = 2.0):
    if name == "pss":
        return PSSAgent(L, T, u)
    if name == "sh":
        return SHAgent(L, T)
    if name == "up":
        return UPAgent(L, T)
    raise ValueError(f"unknown algorithm {name!r}; expected one of {AGENT_NAMES}")

