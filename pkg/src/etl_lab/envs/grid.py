"""Common-pool resource grid: movement, harvesting, cooldowns and conflict counts.

A step runs in two phases. Maintenance comes first: cooldown counters tick down,
then tiles that are not cooling regrow. Actions follow: moves resolve
simultaneously and harvests are settled. Doing maintenance first means a harvest
on a full tile leaves exactly ``initial_amount - harvest_yield`` behind at the end
of that step.

A harvesting agent targets the richest non-cooling tile of its 3x3 window; ties
go to the nearest tile (own cell, then orthogonal neighbours, then diagonals). If every tile in the window is
cooling, it targets its own cell and gets nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from ..core import EpisodeMetrics, RngStream, Transition, UsageError
from ..signals import GridObservation

NORTH, SOUTH, EAST, WEST, STAY, HARVEST = range(6)
N_ACTIONS = 6
_MOVES = {NORTH: (0, -1), SOUTH: (0, 1), EAST: (1, 0), WEST: (-1, 0)}

# Cell codes in the local-pattern state key.
CELL_ACTIVE, CELL_BLOCKED, CELL_OCCUPIED = 0, 1, 2


@dataclass(frozen=True)
class GridConfig:
    width: int = 15
    height: int = 15
    n_agents: int = 4
    initial_amount: float = 5.0
    harvest_yield: float = 1.0
    cooldown_steps: int = 10
    regrow_per_step: float = 0.05
    steps_per_episode: int = 200
    depleted_threshold: float = 0.5
    regrowth_threshold: float = 5.0

    def __post_init__(self):
        for name in ("width", "height", "n_agents", "cooldown_steps", "steps_per_episode"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ValueError(f"{name} must be a positive integer")
        for name in ("initial_amount", "harvest_yield", "regrow_per_step", "depleted_threshold",
                     "regrowth_threshold"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.n_agents > self.width * self.height:
            raise ValueError("n_agents cannot exceed the number of cells")

    @property
    def n_cells(self) -> int:
        return self.width * self.height


@dataclass
class GridState:
    """Tiles are stored flat, row-major: index ``y * width + x``."""

    amount: list[float]
    cooldown: list[int]
    positions: list[tuple[int, int]]
    step: int = 0
    conflicts: int = 0
    contested: frozenset = field(default_factory=frozenset)  # tiles contested on the last step
    in_conflict: list[bool] = field(default_factory=list)  # agents that contested on the last step

    @classmethod
    def fresh(cls, config: GridConfig, rng: RngStream) -> "GridState":
        taken: set[int] = set()
        positions = []
        for _ in range(config.n_agents):
            while True:
                cell = rng.integers(config.n_cells)
                if cell not in taken:
                    break
            taken.add(cell)
            positions.append((cell % config.width, cell // config.width))
        return cls(
            amount=[config.initial_amount] * config.n_cells,
            cooldown=[0] * config.n_cells,
            positions=positions,
            in_conflict=[False] * config.n_agents,
        )


def window_cells(x: int, y: int, config: GridConfig) -> list[int]:
    """Flat indices of the in-bounds cells of the 3x3 window around ``(x, y)``, row-major."""
    out = []
    for dy in (-1, 0, 1):
        yy = y + dy
        if 0 <= yy < config.height:
            for dx in (-1, 0, 1):
                xx = x + dx
                if 0 <= xx < config.width:
                    out.append(yy * config.width + xx)
    return out


# Harvest preference among equally rich tiles: own cell, then the orthogonal
# neighbours, then the diagonals (each group in row-major order).
_NEAREST_FIRST = ((0, 0), (0, -1), (-1, 0), (1, 0), (0, 1), (-1, -1), (1, -1), (-1, 1), (1, 1))


def harvest_target(state: GridState, x: int, y: int, config: GridConfig) -> int:
    best, best_amount = y * config.width + x, -1.0
    for dx, dy in _NEAREST_FIRST:
        xx, yy = x + dx, y + dy
        if 0 <= xx < config.width and 0 <= yy < config.height:
            c = yy * config.width + xx
            if state.cooldown[c] == 0 and state.amount[c] > best_amount:
                best, best_amount = c, state.amount[c]
    return best


def cooldown_fraction(state: GridState) -> float:
    n = len(state.cooldown)
    if n == 0:
        return 0.0
    return sum(1 for c in state.cooldown if c > 0) / n


def remaining_resources(state: GridState) -> float:
    return math.fsum(state.amount)


def conflicts_per_step(conflicts: int, steps_per_episode: int) -> float:
    return conflicts / steps_per_episode


def _maintain(state: GridState, config: GridConfig) -> float:
    """Tick cooldowns and regrow idle tiles; returns the total regrowth added."""
    amount, cooldown = state.amount, state.cooldown
    cap, rate = config.initial_amount, config.regrow_per_step
    grown = 0.0
    for c in range(len(amount)):
        if cooldown[c] > 0:
            cooldown[c] -= 1
            continue
        a = amount[c]
        if a < cap:
            b = a + rate
            if b > cap:
                b = cap
            amount[c] = b
            grown += b - a
    return grown


def grid_step(state: GridState, joint_actions: Sequence[int], rng: RngStream,
              config: GridConfig) -> tuple[GridState, list[float], int]:
    """Advance one step in place. Returns ``(state, rewards, conflicts_this_step)``."""
    n = len(state.positions)
    if len(joint_actions) != n:
        raise UsageError(f"expected {n} actions, got {len(joint_actions)}")
    for a in joint_actions:
        if a not in _MOVES and a != STAY and a != HARVEST:
            raise UsageError(f"unknown grid action {a!r}")

    _maintain(state, config)

    # Harvest targets are chosen on the post-maintenance layout, before anyone moves.
    contenders: dict[int, list[int]] = {}
    for i, a in enumerate(joint_actions):
        if a == HARVEST:
            x, y = state.positions[i]
            contenders.setdefault(harvest_target(state, x, y, config), []).append(i)

    occupied = set(state.positions)
    wanted: dict[tuple[int, int], list[int]] = {}
    for i, a in enumerate(joint_actions):
        move = _MOVES.get(a)
        if move is None:
            continue
        x, y = state.positions[i]
        nx, ny = x + move[0], y + move[1]
        if 0 <= nx < config.width and 0 <= ny < config.height and (nx, ny) not in occupied:
            wanted.setdefault((nx, ny), []).append(i)
    for cell, movers in wanted.items():
        if len(movers) == 1:
            state.positions[movers[0]] = cell

    rewards = [0.0] * n
    in_conflict = [False] * n
    conflicts = 0
    contested = []
    for tile in sorted(contenders):
        agents = contenders[tile]
        if len(agents) > 1:
            conflicts += len(agents) - 1
            contested.append(tile)
            for i in agents:
                in_conflict[i] = True
            winner = agents[rng.integers(len(agents))]
        else:
            winner = agents[0]
        if state.cooldown[tile] > 0:
            continue
        a = state.amount[tile]
        if a >= config.depleted_threshold:
            gain = config.harvest_yield if config.harvest_yield <= a else a
            a -= gain
            state.amount[tile] = a
            rewards[winner] = gain
        if a < config.depleted_threshold:
            state.cooldown[tile] = config.cooldown_steps

    state.step += 1
    state.conflicts += conflicts
    state.contested = frozenset(contested)
    state.in_conflict = in_conflict
    return state, rewards, conflicts


def local_view(state: GridState, agent: int, config: GridConfig) -> tuple[int, GridObservation]:
    """State key (base-3 code of the 3x3 pattern) and signal observation for ``agent``."""
    x, y = state.positions[agent]
    others = {p for j, p in enumerate(state.positions) if j != agent}
    code = 0
    active = total = 0
    for dy in (-1, 0, 1):
        yy = y + dy
        for dx in (-1, 0, 1):
            xx = x + dx
            if not (0 <= xx < config.width and 0 <= yy < config.height):
                cell = CELL_BLOCKED
            else:
                c = yy * config.width + xx
                total += 1
                idle = state.cooldown[c] == 0
                if idle:
                    active += 1
                if (xx, yy) in others:
                    cell = CELL_OCCUPIED
                elif idle and state.amount[c] >= config.depleted_threshold:
                    cell = CELL_ACTIVE
                else:
                    cell = CELL_BLOCKED
            code = code * 3 + cell
    target = harvest_target(state, x, y, config)
    # A harvest is "stressing" when its target is still regrowing (below the
    # regrowth threshold) or cooling, or when this agent or its target was in a
    # contest on the previous step.
    stressed = (
        state.cooldown[target] > 0
        or state.amount[target] < config.regrowth_threshold
        or target in state.contested
        or state.in_conflict[agent]
    )
    obs = GridObservation(active / total, state.in_conflict[agent], stressed)
    return code, obs


class GridEnv:
    """Plays full grid episodes; all agents act simultaneously, collected in id order."""

    n_actions = N_ACTIONS

    def __init__(self, config: Optional[GridConfig] = None):
        self.config = config or GridConfig()

    @property
    def n_agents(self) -> int:
        return self.config.n_agents

    def play(self, agents: Sequence, rng: RngStream) -> EpisodeMetrics:
        cfg = self.config
        n = cfg.n_agents
        state = GridState.fresh(cfg, rng)
        returns = [0.0] * n
        views = [local_view(state, i, cfg) for i in range(n)]
        last = cfg.steps_per_episode - 1
        for t in range(cfg.steps_per_episode):
            actions = [agents[i].act(views[i][0], views[i][1]) for i in range(n)]
            _, rewards, _ = grid_step(state, actions, rng, cfg)
            terminal = t == last
            nxt = [local_view(state, i, cfg) for i in range(n)]
            for i in range(n):
                returns[i] += rewards[i]
                agents[i].observe(
                    Transition(views[i][0], actions[i], rewards[i],
                               None if terminal else nxt[i][0], terminal),
                    nxt[i][1],
                )
            views = nxt
        for a in agents:
            a.end_episode()
        return EpisodeMetrics(
            returns=returns,
            steps=state.step,
            extra={
                "conflicts_per_step": conflicts_per_step(state.conflicts, cfg.steps_per_episode),
                "cooldown_fraction": cooldown_fraction(state),
                "remaining_resources": remaining_resources(state),
            },
        )
