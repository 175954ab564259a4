"""Reference agents: tabular Q-learning, first-visit Monte Carlo control, fixed IPD
strategies, and the forced-greedy wrapper."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Optional, Sequence

from .core import RngStream, Transition, UsageError
from .learners import QTable, epsilon_greedy, q_learning_step
from .signals import COOPERATE, DEFECT


class QLearnerAgent:
    def __init__(self, n_actions: int, rng: RngStream, epsilon: float = 0.1,
                 learn_rate: float = 0.1, discount: float = 0.95):
        self.n_actions = n_actions
        self.rng = rng
        self.epsilon = epsilon
        self.learn_rate = learn_rate
        self.discount = discount
        self.q = QTable(n_actions)

    def act(self, state: Hashable, obs=None) -> int:
        return epsilon_greedy(self.q, state, self.epsilon, self.rng)

    def observe(self, t: Transition, obs=None) -> None:
        q_learning_update(self, t)

    def end_episode(self) -> None:
        pass


def q_learning_update(agent: QLearnerAgent, t: Transition) -> QLearnerAgent:
    q_learning_step(agent.q, t.state, t.action, t.reward, t.next_state, t.terminal,
                    agent.learn_rate, agent.discount)
    return agent


class McControlAgent:
    """First-visit Monte Carlo control with running-mean returns."""

    def __init__(self, n_actions: int, rng: RngStream, epsilon: float = 0.1, discount: float = 0.95):
        self.n_actions = n_actions
        self.rng = rng
        self.epsilon = epsilon
        self.discount = discount
        self.q = QTable(n_actions)
        self.counts: dict[tuple[Hashable, int], int] = {}
        self.episode: list[Transition] = []

    def act(self, state: Hashable, obs=None) -> int:
        return epsilon_greedy(self.q, state, self.epsilon, self.rng)

    def observe(self, t: Transition, obs=None) -> None:
        self.episode.append(t)

    def end_episode(self) -> None:
        if self.episode:
            mc_update(self, self.episode)
        self.episode = []


def mc_update(agent: McControlAgent, episode: Sequence[Transition]) -> McControlAgent:
    if not episode or not episode[-1].terminal:
        raise UsageError("Monte Carlo update needs a complete (terminal) episode")
    first = {}
    for i, t in enumerate(episode):
        first.setdefault((t.state, t.action), i)
    g = 0.0
    returns = [0.0] * len(episode)
    for i in range(len(episode) - 1, -1, -1):
        g = episode[i].reward + agent.discount * g
        returns[i] = g
    for (state, action), i in first.items():
        n = agent.counts.get((state, action), 0) + 1
        agent.counts[(state, action)] = n
        row = agent.q.row(state)
        row[action] += (returns[i] - row[action]) / n
    return agent


# --- Iterated prisoner's dilemma strategies ---------------------------------

STRATEGY_KINDS = ("allc", "alld", "random", "tft", "delayed_coop", "delayed_defect")


@dataclass(frozen=True)
class IpdStrategy:
    kind: str
    switch_round: int = 50

    def __post_init__(self):
        if self.kind not in STRATEGY_KINDS:
            raise ValueError(f"unknown IPD strategy {self.kind!r}")
        if self.switch_round < 1:
            raise ValueError("switch_round must be positive")

    @property
    def name(self) -> str:
        if self.kind in ("delayed_coop", "delayed_defect"):
            return f"{self.kind}:{self.switch_round}"
        return self.kind


def ipd_strategy_action(strategy: IpdStrategy, round: int, opponent_last: Optional[int],
                        rng: Optional[RngStream] = None) -> int:
    if round < 1:
        raise UsageError("rounds are numbered from 1")
    kind = strategy.kind
    if kind == "allc":
        return COOPERATE
    if kind == "alld":
        return DEFECT
    if kind == "random":
        return COOPERATE if rng.random() < 0.5 else DEFECT
    if kind == "tft":
        return COOPERATE if opponent_last is None else opponent_last
    if kind == "delayed_coop":
        return COOPERATE if round <= strategy.switch_round else DEFECT
    return DEFECT if round <= strategy.switch_round else COOPERATE


class FixedStrategyPlayer:
    """Adapter giving an :class:`IpdStrategy` the agent interface."""

    def __init__(self, strategy: IpdStrategy, rng: RngStream):
        self.strategy = strategy
        self.rng = rng
        self.round = 0

    def act(self, state, obs) -> int:
        self.round += 1
        return ipd_strategy_action(self.strategy, self.round, obs.opponent_last, self.rng)

    def observe(self, t: Transition, obs=None) -> None:
        pass

    def end_episode(self) -> None:
        self.round = 0


class ForcedGreedyWrapper:
    """Emits ``greedy_action`` for every decision in episodes before ``greedy_until_episode``.

    The inner agent keeps observing every transition, so it learns from the forced
    outcomes.
    """

    def __init__(self, inner, greedy_until_episode: int, greedy_action: int = 2):
        if greedy_until_episode < 0:
            raise ValueError("greedy_until_episode must be non-negative")
        self.inner = inner
        self.greedy_until_episode = greedy_until_episode
        self.greedy_action = greedy_action
        self.episode = 0

    @property
    def forcing(self) -> bool:
        return self.episode < self.greedy_until_episode

    def act(self, state, obs) -> int:
        if self.episode < self.greedy_until_episode:
            return self.greedy_action
        return self.inner.act(state, obs)

    def observe(self, t: Transition, obs=None) -> None:
        self.inner.observe(t, obs)

    def end_episode(self) -> None:
        self.inner.end_episode()
        self.episode += 1

    def __getattr__(self, name):
        if name == "inner":
            raise AttributeError(name)
        return getattr(self.inner, name)
