"""Scalar trust state and its update rule.

    delta = alpha * support - beta * dissatisfaction + gamma * (t_bar - t_value)
    t_value <- clip(t_value + delta, -1, 1)
    t_bar   <- (1 - lambda_bar) * t_bar + lambda_bar * t_value

``t_bar`` is an exponential moving average of the clipped trust. The history
window feeds ``trust_variance`` (a population standard deviation).
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

from .core import UsageError


@dataclass(frozen=True)
class TrustParams:
    alpha: float = 0.1
    beta: float = 0.2
    gamma: float = 0.05
    lambda_bar: float = 0.01
    window_w: int = 50

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0 or self.gamma < 0:
            raise ValueError("alpha, beta and gamma must be non-negative")
        if not 0.0 < self.lambda_bar <= 1.0:
            raise ValueError("lambda_bar must lie in (0, 1]")
        if self.window_w < 1:
            raise ValueError("window_w must be positive")


class TrustState:
    __slots__ = ("t_value", "t_bar", "history", "_sum", "_sumsq", "_since_sync")

    def __init__(self, window_w: int = 50, t_value: float = 0.0, t_bar: float | None = None):
        if not -1.0 <= t_value <= 1.0:
            raise ValueError("trust must lie in [-1, 1]")
        self.t_value = t_value
        self.t_bar = t_value if t_bar is None else t_bar
        self.history: deque[float] = deque(maxlen=window_w)
        self._sum = 0.0
        self._sumsq = 0.0
        self._since_sync = 0

    def _push(self, value: float) -> None:
        h = self.history
        if len(h) == h.maxlen:
            old = h[0]
            self._sum -= old
            self._sumsq -= old * old
        h.append(value)
        self._sum += value
        self._sumsq += value * value
        self._since_sync += 1
        if self._since_sync >= h.maxlen:
            # bound floating drift of the running sums
            self._sum = math.fsum(h)
            self._sumsq = math.fsum(v * v for v in h)
            self._since_sync = 0

    def update(self, params: TrustParams, support: float, dissatisfaction: float) -> "TrustState":
        if not 0.0 <= support <= 1.0:
            raise UsageError(f"support must lie in [0, 1], got {support}")
        if dissatisfaction < 0.0:
            raise UsageError(f"dissatisfaction must be non-negative, got {dissatisfaction}")
        t = self.t_value
        delta = params.alpha * support - params.beta * dissatisfaction + params.gamma * (self.t_bar - t)
        t += delta
        if t > 1.0:
            t = 1.0
        elif t < -1.0:
            t = -1.0
        self.t_value = t
        lam = params.lambda_bar
        self.t_bar = (1.0 - lam) * self.t_bar + lam * t
        self._push(t)
        return self

    def variance(self) -> float:
        """Population std of the trust history; 0.0 below two entries."""
        n = len(self.history)
        if n < 2:
            return 0.0
        mean = self._sum / n
        var = self._sumsq / n - mean * mean
        if var < 1e-9:
            mean = math.fsum(self.history) / n
            var = math.fsum((v - mean) ** 2 for v in self.history) / n
        return math.sqrt(var) if var > 0.0 else 0.0


def update_trust(state: TrustState, params: TrustParams, support: float, dissatisfaction: float) -> TrustState:
    return state.update(params, support, dissatisfaction)


def trust_variance(state: TrustState) -> float:
    return state.variance()
