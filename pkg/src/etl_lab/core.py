"""Simulation substrate: seeded streams, transitions, greedy selection, episode driver.

Random streams use CPython's Mersenne Twister (``random.Random``) seeded with a
64-bit value produced by the SplitMix64 finalizer applied to
``master_seed + (stream + 1) * 0x9E3779B97F4A7C15``. Only ``Random.random()`` is
ever called; integers and permutations are derived from it here so the draw
sequence does not depend on version-specific ``randrange``/``shuffle`` internals.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any, Hashable, Sequence

MASK64 = (1 << 64) - 1
GOLDEN64 = 0x9E3779B97F4A7C15


class UsageError(ValueError):
    """An operation was called with arguments outside its contract."""


class ConfigError(ValueError):
    """A configuration failed validation; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def splitmix64(x: int) -> int:
    z = (x + GOLDEN64) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, stream: int) -> int:
    """64-bit seed for stream ``stream`` of ``master_seed``."""
    if stream < 0:
        raise UsageError("stream index must be non-negative")
    return splitmix64((master_seed + (stream + 1) * GOLDEN64) & MASK64)


class RngStream:
    """One independent, reproducible random stream."""

    __slots__ = ("seed", "_rng", "random")

    def __init__(self, seed: int):
        self.seed = seed & MASK64
        self._rng = random.Random(self.seed)
        self.random = self._rng.random

    @classmethod
    def derived(cls, master_seed: int, stream: int) -> "RngStream":
        return cls(derive_seed(master_seed, stream))

    def integers(self, n: int) -> int:
        """Uniform integer in ``[0, n)``."""
        return int(self.random() * n)

    def permutation(self, n: int) -> list[int]:
        """Uniform random permutation of ``range(n)`` (Fisher-Yates)."""
        perm = list(range(n))
        for i in range(n - 1, 0, -1):
            j = int(self.random() * (i + 1))
            perm[i], perm[j] = perm[j], perm[i]
        return perm


@dataclass(frozen=True)
class Transition:
    state: Hashable
    action: int
    reward: float
    next_state: Hashable
    terminal: bool


@dataclass
class AgentHandle:
    id: int
    policy: Any


@dataclass
class EpisodeMetrics:
    """Per-episode record. ``extra`` holds environment-specific columns."""

    returns: list[float]
    steps: int = 0
    extra: dict[str, Any] = field(default_factory=dict)


def argmax_tiebreak(values: Sequence[float]) -> int:
    """Index of the maximum value; ties go to the lowest index."""
    if not isinstance(values, list):
        values = list(values)
    if not values:
        raise UsageError("argmax of an empty sequence")
    return values.index(max(values))


def run_episode(environment, agents: Sequence[AgentHandle], rng: RngStream) -> EpisodeMetrics:
    """Reset ``environment`` and play it to termination with ``agents``.

    Environments expose ``n_agents`` and ``play(policies, rng)``; the call order of
    agents within a step is defined by the environment.
    """
    if len(agents) != environment.n_agents:
        raise ConfigError(
            "roster", f"environment needs {environment.n_agents} agents, got {len(agents)}"
        )
    ids = sorted(a.id for a in agents)
    if ids != list(range(len(agents))):
        raise ConfigError("roster", "agent ids must be unique and contiguous from 0")
    ordered = sorted(agents, key=lambda a: a.id)
    return environment.play([a.policy for a in ordered], rng)
