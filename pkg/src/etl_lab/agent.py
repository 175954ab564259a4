"""The trust-learning agent: a tabular Q-learner wrapped in memory, trust and exploration."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Hashable, Optional, Sequence

from .core import RngStream, Transition, argmax_tiebreak
from .exploration import ExplorationParams, ExplorationState, update_epsilon
from .learners import QTable, q_learning_step
from .memory import DEFAULT_STM_SIZE, MemoryBuffers
from .signals import SignalSample
from .trust import TrustParams, TrustState

FALLBACK_UNIFORM = "uniform"
FALLBACK_SELF_PROTECTIVE = "self_protective"


@dataclass(frozen=True)
class EtlParams:
    trust: TrustParams = field(default_factory=TrustParams)
    exploration: ExplorationParams = field(default_factory=ExplorationParams)
    learn_rate: float = 0.1
    discount: float = 0.95
    coop_weight: float = 3.0
    stm_size: int = DEFAULT_STM_SIZE
    initial_trust: float = 0.3
    closed_gate_fallback: str = FALLBACK_SELF_PROTECTIVE

    def __post_init__(self):
        if self.coop_weight < 0:
            raise ValueError("coop_weight must be non-negative")
        if self.closed_gate_fallback not in (FALLBACK_UNIFORM, FALLBACK_SELF_PROTECTIVE):
            raise ValueError(f"unknown closed_gate_fallback {self.closed_gate_fallback!r}")


class EtlAgent:
    """Trust-modulated tabular agent.

    ``mapper`` turns an environment observation (plus this agent's memory) into a
    :class:`SignalSample`; it is called once when acting and once when observing
    the outcome.
    """

    def __init__(self, n_actions: int, mapper: Callable, rng: RngStream, params: Optional[EtlParams] = None):
        self.params = params or EtlParams()
        p = self.params
        self.n_actions = n_actions
        self.mapper = mapper
        self.rng = rng
        self.q = QTable(n_actions)
        self.memory = MemoryBuffers(p.stm_size)
        self.trust = TrustState(p.trust.window_w, p.initial_trust)
        self.exploration = ExplorationState(p.exploration.epsilon_init)
        self.stability_q = 0.0

    def act(self, state: Hashable, obs) -> int:
        sig = self.mapper(obs, self.memory)
        self.stability_q = sig.stability_q
        return select_action(self, state, self.rng, sig.greediness, sig.stability_q)

    def observe(self, t: Transition, obs) -> None:
        observe(self, t, self.mapper(obs, self.memory))

    def end_episode(self) -> None:
        pass

    @property
    def trust_value(self) -> float:
        return self.trust.t_value


def adjusted_values(q_row: Sequence[float], trust: float, coop_weight: float,
                    greediness: Sequence[float]) -> list[float]:
    """Q(s, a) - coop_weight * max(0, trust) * greediness[a]."""
    k = coop_weight * trust if trust > 0.0 else 0.0
    if k == 0.0:
        return list(q_row)
    return [v - k * g for v, g in zip(q_row, greediness)]


def defensive_values(q_row: Sequence[float], trust: float, coop_weight: float,
                     greediness: Sequence[float]) -> list[float]:
    """Q(s, a) + coop_weight * max(0, -trust) * greediness[a]: distrust favours grabbing."""
    k = -coop_weight * trust if trust < 0.0 else 0.0
    if k == 0.0:
        return list(q_row)
    return [v + k * g for v, g in zip(q_row, greediness)]


def select_action(agent: EtlAgent, state: Hashable, rng: RngStream, greediness: Sequence[float],
                  stability_q: Optional[float] = None) -> int:
    """Gate-dependent choice between the trust-adjusted greedy action and the rest.

    With the gate open the agent is epsilon-greedy over the trust-adjusted values.
    With the gate closed the adjusted greedy action keeps probability epsilon; the
    remaining mass is uniform noise (``uniform`` fallback) or epsilon-greedy play on
    :func:`defensive_values` (``self_protective`` fallback).
    """
    p = agent.params
    xp = p.exploration
    eps = agent.exploration.epsilon
    trust = agent.trust.t_value
    if stability_q is None:
        stability_q = agent.stability_q
    is_open = trust > xp.trust_gate and stability_q > xp.theta_q
    row = agent.q.rows.get(state) or [0.0] * agent.n_actions
    explore = eps if is_open else 1.0 - eps
    if rng.random() >= explore:
        return argmax_tiebreak(adjusted_values(row, trust, p.coop_weight, greediness))
    if is_open or p.closed_gate_fallback == FALLBACK_UNIFORM:
        return int(rng.random() * agent.n_actions)
    if rng.random() < eps:
        return int(rng.random() * agent.n_actions)
    return argmax_tiebreak(defensive_values(row, trust, p.coop_weight, greediness))


def observe(agent: EtlAgent, t: Transition, signals: SignalSample) -> EtlAgent:
    """Q backup, memory record, trust update, epsilon update (in that order)."""
    p = agent.params
    q_learning_step(agent.q, t.state, t.action, t.reward, t.next_state, t.terminal,
                    p.learn_rate, p.discount)
    agent.memory.record(t)
    agent.trust.update(p.trust, signals.support, signals.dissatisfaction)
    update_epsilon(agent.exploration, agent.trust.variance(), p.exploration)
    return agent
