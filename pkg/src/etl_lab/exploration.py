"""Adaptive exploration rate and the trust/stability exploit gate."""

from __future__ import annotations

from dataclasses import dataclass

EPSILON_GROWTH = 1.1
EPSILON_DECAY = 0.995
EPSILON_CAP = 0.9


@dataclass(frozen=True)
class ExplorationParams:
    epsilon_init: float = 0.3
    epsilon_min: float = 0.01
    epsilon_cap: float = EPSILON_CAP
    growth: float = EPSILON_GROWTH
    decay: float = EPSILON_DECAY
    theta_t: float = 0.1
    theta_q: float = 0.5
    trust_gate: float = 0.5
    freeze_epsilon: bool = False

    def __post_init__(self):
        if not 0.0 < self.epsilon_min < self.epsilon_cap:
            raise ValueError("need 0 < epsilon_min < epsilon_cap")
        if self.growth <= 1.0:
            raise ValueError("growth must exceed 1")
        if not 0.0 < self.decay < 1.0:
            raise ValueError("decay must lie in (0, 1)")
        if self.theta_t < 0.0:
            raise ValueError("theta_t must be non-negative")


class ExplorationState:
    __slots__ = ("epsilon",)

    def __init__(self, epsilon: float):
        self.epsilon = epsilon


def update_epsilon(state: ExplorationState, sigma_t: float, params: ExplorationParams) -> ExplorationState:
    """Grow epsilon while trust is volatile (``sigma_t > theta_t``), decay it otherwise."""
    if params.freeze_epsilon:
        return state
    eps = state.epsilon
    if sigma_t > params.theta_t:
        eps = min(params.epsilon_cap, eps * params.growth)
    else:
        eps = max(params.epsilon_min, eps * params.decay)
    state.epsilon = eps
    return state


def gate_open(trust: float, stability_q: float, params: ExplorationParams) -> bool:
    return trust > params.trust_gate and stability_q > params.theta_q


def exploit_probability(epsilon: float, trust: float, stability_q: float, params: ExplorationParams) -> float:
    """Probability of taking the greedy action: ``1 - eps`` if the gate is open, else ``eps``."""
    if trust > params.trust_gate and stability_q > params.theta_q:
        return 1.0 - epsilon
    return epsilon
