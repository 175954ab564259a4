"""Tabular value-table helpers shared by every learning agent."""

from __future__ import annotations

from typing import Hashable


class QTable:
    """Dict-backed Q(s, .) rows, created lazily at zero."""

    __slots__ = ("n_actions", "rows")

    def __init__(self, n_actions: int):
        self.n_actions = n_actions
        self.rows: dict[Hashable, list[float]] = {}

    def row(self, state: Hashable) -> list[float]:
        r = self.rows.get(state)
        if r is None:
            r = self.rows[state] = [0.0] * self.n_actions
        return r

    def max_value(self, state: Hashable) -> float:
        r = self.rows.get(state)
        return 0.0 if r is None else max(r)

    def __getitem__(self, key: tuple[Hashable, int]) -> float:
        state, action = key
        r = self.rows.get(state)
        return 0.0 if r is None else r[action]

    def __setitem__(self, key: tuple[Hashable, int], value: float) -> None:
        state, action = key
        self.row(state)[action] = value


def q_learning_step(q: QTable, state, action: int, reward: float, next_state, terminal: bool,
                    learn_rate: float, discount: float) -> None:
    """One-step Q-learning backup; no bootstrap on terminal transitions."""
    row = q.row(state)
    target = reward if terminal else reward + discount * q.max_value(next_state)
    row[action] += learn_rate * (target - row[action])


def epsilon_greedy(q: QTable, state, epsilon: float, rng) -> int:
    if rng.random() < epsilon:
        return int(rng.random() * q.n_actions)
    row = q.rows.get(state)
    if row is None:
        return 0
    return row.index(max(row))
