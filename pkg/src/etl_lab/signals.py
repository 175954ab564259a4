"""Per-environment mappers from local observations to trust/exploration signals."""

from __future__ import annotations

from typing import NamedTuple, Optional, Sequence

from .memory import MemoryBuffers


class SignalSample(NamedTuple):
    support: float
    dissatisfaction: float
    stability_q: float
    greediness: Sequence[float]


def validate_signals(sample: SignalSample, n_actions: int) -> None:
    """Raise ``ValueError`` when ``sample`` breaks its range contract."""
    if not 0.0 <= sample.support <= 1.0:
        raise ValueError(f"support out of range: {sample.support}")
    if sample.dissatisfaction < 0.0:
        raise ValueError(f"negative dissatisfaction: {sample.dissatisfaction}")
    if not 0.0 <= sample.stability_q <= 1.0:
        raise ValueError(f"stability out of range: {sample.stability_q}")
    if len(sample.greediness) != n_actions:
        raise ValueError("greediness length does not match the action count")
    if any(not 0.0 <= g <= 1.0 for g in sample.greediness):
        raise ValueError("greediness entries must lie in [0, 1]")


def _clip01(x: float) -> float:
    return 0.0 if x < 0.0 else 1.0 if x > 1.0 else x


# --- Tower -----------------------------------------------------------------

class TowerObservation(NamedTuple):
    food: float  # on the platform when it reached this agent
    below: int  # living agents on lower floors
    hunger: float
    h_max: float


def map_signals_tower(obs: TowerObservation, memory: Optional[MemoryBuffers] = None) -> SignalSample:
    """Fair-share support, hunger as dissatisfaction, greed above the fair share.

    Consuming ``a`` units counts as greedy by ``clip(a - food / (below + 1), 0, 1)``:
    taking more than an even split of what is left for this floor and everyone
    beneath it.
    """
    share = obs.food / (obs.below + 1)
    hunger_frac = _clip01(obs.hunger / obs.h_max)
    greed = (0.0, _clip01(1.0 - share), _clip01(2.0 - share))
    return SignalSample(_clip01(share), hunger_frac, 1.0 - hunger_frac, greed)


# --- Grid ------------------------------------------------------------------

class GridObservation(NamedTuple):
    active_fraction: float  # non-cooldown share of the local window
    conflict: bool  # agent was in a harvest contest on the previous step
    harvest_stressed: bool  # current harvest target is depleted or was contested


GRID_Q_SCALE = 1.0
_GRID_CALM = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
_GRID_GREEDY = (0.0, 0.0, 0.0, 0.0, 0.0, 1.0)


def map_signals_grid(
    obs: GridObservation, memory: Optional[MemoryBuffers] = None, q_scale: float = GRID_Q_SCALE
) -> SignalSample:
    rho = _clip01(obs.active_fraction)
    c = 1.0 if obs.conflict else 0.0
    std = memory.stm_reward_std() if memory is not None else 0.0
    q = _clip01(1.0 - std / q_scale)
    return SignalSample(rho, c + (1.0 - rho), q, _GRID_GREEDY if obs.harvest_stressed else _GRID_CALM)


# --- Iterated prisoner's dilemma -------------------------------------------

COOPERATE = 0
DEFECT = 1
IPD_MAX_PAYOFF = 5.0
_IPD_GREED = (0.0, 1.0)


class IpdObservation(NamedTuple):
    own_last: Optional[int]
    opponent_last: Optional[int]


def map_signals_ipd(obs: IpdObservation, memory: Optional[MemoryBuffers] = None) -> SignalSample:
    if obs.opponent_last is None:
        support = 0.5
        dissatisfaction = 0.0
    else:
        support = 1.0 if obs.opponent_last == COOPERATE else 0.0
        dissatisfaction = 1.0 if obs.opponent_last == DEFECT else 0.0
    mean_payoff = memory.recent_avg_reward() if memory is not None else 0.0
    return SignalSample(support, dissatisfaction, _clip01(mean_payoff / IPD_MAX_PAYOFF), _IPD_GREED)


MAPPERS = {"tower": map_signals_tower, "grid": map_signals_grid, "ipd": map_signals_ipd}
