"""Four-floor Tower dilemma: a descending food platform, hunger and starvation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Hashable, Optional, Sequence

from ..core import EpisodeMetrics, RngStream, Transition, UsageError
from ..signals import TowerObservation

N_ACTIONS = 3  # consume 0, 1 or 2 units
HUNGER_BUCKETS = 5


@dataclass(frozen=True)
class TowerConfig:
    floors: int = 4
    platform_food: float = 4.0
    h_max: float = 3.0
    delta_h: float = 1.0
    kappa: float = 2.0
    initial_hunger: float = 0.0
    rounds_per_episode: int = 20

    def __post_init__(self):
        if self.floors < 2:
            raise ValueError("floors must be at least 2")
        if self.platform_food < 0:
            raise ValueError("platform_food must be non-negative")
        if self.h_max <= 0 or self.delta_h <= 0 or self.kappa <= 0:
            raise ValueError("h_max, delta_h and kappa must be positive")
        if not 0.0 <= self.initial_hunger < self.h_max:
            raise ValueError("initial_hunger must lie in [0, h_max)")
        if self.rounds_per_episode < 1:
            raise ValueError("rounds_per_episode must be positive")


@dataclass
class TowerState:
    hunger: list[float]
    floor_of_agent: list[int]  # 0 is the bottom floor
    alive: list[bool]
    round: int = 0

    @classmethod
    def fresh(cls, config: TowerConfig, rng: RngStream) -> "TowerState":
        n = config.floors
        return cls([config.initial_hunger] * n, rng.permutation(n), [True] * n)


@dataclass
class RoundResult:
    requested: list[Optional[int]]
    consumed: list[int]
    rewards: list[Optional[float]]  # None for agents already dead before the round
    food_trace: list[float]  # platform content on arrival at each floor, top first, plus leftover
    died: list[int]
    observations: list[Optional[TowerObservation]]


def hunger_update(hunger: float, consumed: int, config: TowerConfig) -> float:
    h = hunger + config.delta_h - config.kappa * consumed
    if h > config.h_max:
        h = config.h_max
    return h if h > 0.0 else 0.0


def tower_reward(a_actual: int, hunger_after: float, config: TowerConfig) -> float:
    if a_actual not in (0, 1, 2):
        raise UsageError(f"consumption must be 0, 1 or 2, got {a_actual}")
    return -1.0 if hunger_after >= config.h_max else float(a_actual)


def reassign_floors(state: TowerState, rng: RngStream) -> TowerState:
    state.floor_of_agent = rng.permutation(len(state.floor_of_agent))
    return state


def episode_success(state: TowerState) -> bool:
    return all(state.alive)


def hunger_bucket(hunger: float, config: TowerConfig) -> int:
    b = int(HUNGER_BUCKETS * hunger / config.h_max)
    return b if b < HUNGER_BUCKETS else HUNGER_BUCKETS - 1


def tower_round(state: TowerState, config: TowerConfig,
                choose: Callable[[int, TowerObservation], int], rng: RngStream) -> RoundResult:
    """Run one platform descent; ``choose(agent, observation)`` returns 0, 1 or 2.

    Dead agents are skipped. Hunger and rewards are settled after the platform
    reaches the bottom, then floors are reshuffled.
    """
    n = config.floors
    agent_at = [0] * n
    for i, f in enumerate(state.floor_of_agent):
        agent_at[f] = i
    alive = state.alive
    living_below = [0] * n
    count = 0
    for f in range(n):
        living_below[f] = count
        if alive[agent_at[f]]:
            count += 1

    food = config.platform_food
    requested: list[Optional[int]] = [None] * n
    consumed = [0] * n
    observations: list[Optional[TowerObservation]] = [None] * n
    trace = []
    for f in range(n - 1, -1, -1):
        trace.append(food)
        i = agent_at[f]
        if not alive[i]:
            continue
        obs = TowerObservation(food, living_below[f], state.hunger[i], config.h_max)
        a = choose(i, obs)
        if a not in (0, 1, 2):
            raise UsageError(f"consumption must be 0, 1 or 2, got {a!r}")
        requested[i] = a
        take = a if a <= food else int(food)
        consumed[i] = take
        food -= take
        observations[i] = obs
    trace.append(food)

    rewards: list[Optional[float]] = [None] * n
    died = []
    for i in range(n):
        if not alive[i]:
            continue
        h = hunger_update(state.hunger[i], consumed[i], config)
        state.hunger[i] = h
        rewards[i] = tower_reward(consumed[i], h, config)
        if h >= config.h_max:
            alive[i] = False
            died.append(i)
    state.round += 1
    reassign_floors(state, rng)
    return RoundResult(requested, consumed, rewards, trace, died, observations)


class TowerEnv:
    """Plays full Tower episodes for a roster of agents (one per floor)."""

    n_actions = N_ACTIONS

    def __init__(self, config: Optional[TowerConfig] = None):
        self.config = config or TowerConfig()

    @property
    def n_agents(self) -> int:
        return self.config.floors

    def state_key(self, floor: int, obs: TowerObservation) -> Hashable:
        return (floor, hunger_bucket(obs.hunger, self.config), int(obs.food))

    def play(self, agents: Sequence, rng: RngStream) -> EpisodeMetrics:
        cfg = self.config
        n = cfg.floors
        state = TowerState.fresh(cfg, rng)
        pending: list = [None] * n  # (state_key, action, reward, feedback observation)
        keys: list = [None] * n
        returns = [0.0] * n

        def choose(i: int, obs: TowerObservation) -> int:
            key = self.state_key(state.floor_of_agent[i], obs)
            prev = pending[i]
            if prev is not None:
                agents[i].observe(Transition(prev[0], prev[1], prev[2], key, False), prev[3])
                pending[i] = None
            keys[i] = key
            return agents[i].act(key, obs)

        for _ in range(cfg.rounds_per_episode):
            if not any(state.alive):
                break
            res = tower_round(state, cfg, choose, rng)
            for i in range(n):
                r = res.rewards[i]
                if r is None:
                    continue
                returns[i] += r
                o = res.observations[i]
                feedback = TowerObservation(o.food, o.below, state.hunger[i], cfg.h_max)
                if not state.alive[i]:
                    agents[i].observe(Transition(keys[i], res.requested[i], r, None, True), feedback)
                else:
                    pending[i] = (keys[i], res.requested[i], r, feedback)

        for i in range(n):
            prev = pending[i]
            if prev is not None:
                agents[i].observe(Transition(prev[0], prev[1], prev[2], None, True), prev[3])
        for a in agents:
            a.end_episode()

        trusts = [a.trust_value for a in agents if hasattr(a, "trust_value")]
        return EpisodeMetrics(
            returns=returns,
            steps=state.round,
            extra={
                "success": episode_success(state),
                "deaths": sum(1 for x in state.alive if not x),
                "mean_trust": sum(trusts) / len(trusts) if trusts else None,
            },
        )
