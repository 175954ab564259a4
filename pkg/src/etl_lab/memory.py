"""Short-term ring buffer plus long-term per-(state, action) aggregates."""

from __future__ import annotations

import math
from collections import deque
from typing import Hashable

from .core import Transition

DEFAULT_STM_SIZE = 20


class MemoryBuffers:
    """STM holds the last ``stm_size`` transitions; LTM keeps sufficient statistics.

    The long-term store is realised as a visit count and running mean reward per
    (state, action) plus the total number of recorded transitions.
    """

    __slots__ = ("stm_size", "stm", "ltm_count", "ltm_stats", "_sum", "_sumsq")

    def __init__(self, stm_size: int = DEFAULT_STM_SIZE):
        if stm_size < 1:
            raise ValueError("stm_size must be positive")
        self.stm_size = stm_size
        self.stm: deque[Transition] = deque(maxlen=stm_size)
        self.ltm_count = 0
        self.ltm_stats: dict[tuple[Hashable, int], list] = {}
        self._sum = 0.0
        self._sumsq = 0.0

    def record(self, t: Transition) -> "MemoryBuffers":
        stm = self.stm
        if len(stm) == self.stm_size:
            old = stm[0].reward
            self._sum -= old
            self._sumsq -= old * old
        stm.append(t)
        r = t.reward
        self._sum += r
        self._sumsq += r * r
        self.ltm_count += 1
        key = (t.state, t.action)
        stat = self.ltm_stats.get(key)
        if stat is None:
            self.ltm_stats[key] = [1, float(r)]
        else:
            stat[0] += 1
            stat[1] += (r - stat[1]) / stat[0]
        return self

    def recent_rewards(self) -> list[float]:
        return [t.reward for t in self.stm]

    def recent_avg_reward(self) -> float:
        n = len(self.stm)
        if n == 0:
            return 0.0
        return math.fsum(t.reward for t in self.stm) / n

    def stm_reward_std(self) -> float:
        """Population std of STM rewards; 0.0 below two entries."""
        n = len(self.stm)
        if n < 2:
            return 0.0
        # running sums drift; recompute exactly when the cheap estimate is near zero
        mean = self._sum / n
        var = self._sumsq / n - mean * mean
        if var < 1e-9:
            rewards = self.recent_rewards()
            mean = math.fsum(rewards) / n
            var = math.fsum((r - mean) ** 2 for r in rewards) / n
        return math.sqrt(var) if var > 0.0 else 0.0

    def ltm_mean_reward(self, state: Hashable, action: int) -> float | None:
        stat = self.ltm_stats.get((state, action))
        return None if stat is None else stat[1]


def record(buffers: MemoryBuffers, t: Transition) -> MemoryBuffers:
    return buffers.record(t)


def recent_avg_reward(buffers: MemoryBuffers) -> float:
    return buffers.recent_avg_reward()


def stm_reward_std(buffers: MemoryBuffers) -> float:
    return buffers.stm_reward_std()
