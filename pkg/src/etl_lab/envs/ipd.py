"""Iterated prisoner's dilemma: payoffs, matches and the round-robin tournament."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from ..core import EpisodeMetrics, RngStream, Transition, UsageError
from ..signals import COOPERATE, DEFECT, IpdObservation

N_ACTIONS = 2
SUCCESS_THRESHOLD = 2.5
MOVE_NAMES = "CD"

# state key: 0 before the first round, else 1 + 2 * own_last + opponent_last
NO_HISTORY = 0


@dataclass(frozen=True)
class PayoffMatrix:
    reward: float = 3.0  # mutual cooperation
    sucker: float = 0.0
    temptation: float = 5.0
    punishment: float = 1.0  # mutual defection

    def __post_init__(self):
        t, r, p, s = self.temptation, self.reward, self.punishment, self.sucker
        if not (t > r > p > s and 2 * r > t + s):
            raise ValueError("payoffs violate the prisoner's dilemma ordering")

    def __call__(self, move_a: int, move_b: int) -> tuple[float, float]:
        if move_a == COOPERATE:
            return (self.reward, self.reward) if move_b == COOPERATE else (self.sucker, self.temptation)
        if move_a != DEFECT or move_b not in (COOPERATE, DEFECT):
            raise UsageError(f"moves must be C(0) or D(1), got {move_a!r}, {move_b!r}")
        return (self.temptation, self.sucker) if move_b == COOPERATE else (self.punishment, self.punishment)


DEFAULT_PAYOFFS = PayoffMatrix()


def payoff(move_a: int, move_b: int, matrix: PayoffMatrix = DEFAULT_PAYOFFS) -> tuple[float, float]:
    return matrix(move_a, move_b)


def ipd_state(own_last: Optional[int], opponent_last: Optional[int]) -> int:
    if own_last is None:
        return NO_HISTORY
    return 1 + 2 * own_last + opponent_last


@dataclass
class MatchResult:
    totals: tuple[float, float]
    moves: list[tuple[int, int]] = field(default_factory=list)
    rounds: int = 0

    def move_string(self, player: int) -> str:
        return "".join(MOVE_NAMES[m[player]] for m in self.moves)


def play_match(player_a, player_b, rounds: int, rng: Optional[RngStream] = None,
               matrix: PayoffMatrix = DEFAULT_PAYOFFS) -> MatchResult:
    """Simultaneous-move match; each player sees only its own side of the history."""
    if rounds < 1:
        raise UsageError("a match needs at least one round")
    players = (player_a, player_b)
    last: list[Optional[int]] = [None, None]
    totals = [0.0, 0.0]
    moves = []
    for _ in range(rounds):
        obs = (IpdObservation(last[0], last[1]), IpdObservation(last[1], last[0]))
        states = (ipd_state(last[0], last[1]), ipd_state(last[1], last[0]))
        a = player_a.act(states[0], obs[0])
        b = player_b.act(states[1], obs[1])
        pa, pb = matrix(a, b)
        totals[0] += pa
        totals[1] += pb
        moves.append((a, b))
        last = [a, b]
        nxt = (ipd_state(a, b), ipd_state(b, a))
        player_a.observe(Transition(states[0], a, pa, nxt[0], False), IpdObservation(a, b))
        player_b.observe(Transition(states[1], b, pb, nxt[1], False), IpdObservation(b, a))
    for p in players:
        p.end_episode()
    return MatchResult((totals[0], totals[1]), moves, rounds)


def match_success(result: MatchResult, player: int) -> bool:
    if result.rounds <= 0:
        raise UsageError("empty match")
    return result.totals[player] / result.rounds > SUCCESS_THRESHOLD


@dataclass
class TournamentResult:
    names: list[str]
    successes: dict[str, int]
    games: dict[str, int]
    pair_totals: dict[tuple[str, str], list[float]]  # (a, b) -> [sum of a's average payoff, matches]
    matches: list[tuple[str, str, MatchResult]] = field(default_factory=list)

    def success_rate(self, name: str) -> float:
        return self.successes[name] / self.games[name] if self.games[name] else 0.0

    def pair_average(self, a: str, b: str) -> float:
        total, n = self.pair_totals[(a, b)]
        return total / n


def round_robin(strategies: Sequence[tuple[str, Callable[[RngStream], object]]], games_per_pair: int,
                rounds: int, master_seed: int = 0, include_self_play: bool = True,
                matrix: PayoffMatrix = DEFAULT_PAYOFFS, keep_matches: bool = True) -> TournamentResult:
    """Every ordered pair plays ``games_per_pair`` matches with freshly built players.

    ``strategies`` holds (name, factory) pairs; ``factory(rng)`` builds a new player.
    Match ``k`` overall draws its two player streams from ``master_seed`` at stream
    indices ``2k`` and ``2k + 1``. Both sides of a match count toward their own
    strategy's success rate, so a self-pairing contributes two games.
    """
    if len(strategies) < 2:
        raise UsageError("a tournament needs at least two strategies")
    names = [n for n, _ in strategies]
    if len(set(names)) != len(names):
        raise UsageError("strategy names must be unique")
    successes = {n: 0 for n in names}
    games = {n: 0 for n in names}
    pair_totals: dict[tuple[str, str], list[float]] = {}
    matches = []
    k = 0
    for name_a, make_a in strategies:
        for name_b, make_b in strategies:
            if name_a == name_b and not include_self_play:
                continue
            acc = pair_totals.setdefault((name_a, name_b), [0.0, 0])
            for _ in range(games_per_pair):
                pa = make_a(RngStream.derived(master_seed, 2 * k))
                pb = make_b(RngStream.derived(master_seed, 2 * k + 1))
                k += 1
                res = play_match(pa, pb, rounds, matrix=matrix)
                for side, name in ((0, name_a), (1, name_b)):
                    games[name] += 1
                    successes[name] += match_success(res, side)
                acc[0] += res.totals[0] / rounds
                acc[1] += 1
                if keep_matches:
                    matches.append((name_a, name_b, res))
    return TournamentResult(names, successes, games, pair_totals, matches)


class IpdEnv:
    """Single match as an episode, for the generic episode driver."""

    n_actions = N_ACTIONS
    n_agents = 2

    def __init__(self, rounds: int = 500, matrix: PayoffMatrix = DEFAULT_PAYOFFS):
        self.rounds = rounds
        self.matrix = matrix

    def play(self, agents: Sequence, rng: RngStream) -> EpisodeMetrics:
        res = play_match(agents[0], agents[1], self.rounds, rng, self.matrix)
        return EpisodeMetrics(
            returns=list(res.totals),
            steps=res.rounds,
            extra={"success": [match_success(res, 0), match_success(res, 1)], "match": res},
        )
