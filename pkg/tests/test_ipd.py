import pytest
from hypothesis import given, strategies as st

from etl_lab.agent import EtlAgent, EtlParams
from etl_lab.baselines import FixedStrategyPlayer, IpdStrategy
from etl_lab.core import RngStream, UsageError
from etl_lab.envs.ipd import MatchResult, PayoffMatrix, match_success, payoff, play_match, round_robin
from etl_lab.signals import COOPERATE as C, DEFECT as D, map_signals_ipd


def player(kind, k=50, seed=0):
    return FixedStrategyPlayer(IpdStrategy(kind, k), RngStream(seed))


def test_payoff_table():
    assert payoff(C, C) == (3, 3)
    assert payoff(C, D) == (0, 5)
    assert payoff(D, C) == (5, 0)
    assert payoff(D, D) == (1, 1)
    with pytest.raises(UsageError):
        payoff(2, C)


def test_matrix_ordering_enforced():
    with pytest.raises(ValueError):
        PayoffMatrix(reward=6.0)
    with pytest.raises(ValueError):
        PayoffMatrix(temptation=7.0)  # 2R <= T + S


def test_closed_form_matches():
    assert play_match(player("allc"), player("alld"), 500).totals == (0, 2500)
    assert play_match(player("tft"), player("alld"), 500).totals[0] == 499
    assert play_match(player("tft"), player("tft"), 500).totals == (1500, 1500)


def test_delayed_crossings():
    r = play_match(player("delayed_coop"), player("delayed_defect"), 500)
    # rounds 1-50: (C, D); 51-500: (D, C)
    assert r.totals == (450 * 5, 50 * 5)


def test_success_threshold():
    assert match_success(MatchResult((1500.0, 500.0), [], 500), 0)
    assert not match_success(MatchResult((1500.0, 500.0), [], 500), 1)
    assert not match_success(MatchResult((1250.0, 0.0), [], 500), 0)
    with pytest.raises(UsageError):
        match_success(MatchResult((0.0, 0.0), [], 0), 0)


def test_zero_round_match_rejected():
    with pytest.raises(UsageError):
        play_match(player("allc"), player("allc"), 0)


def _factory(kind):
    return lambda rng: FixedStrategyPlayer(IpdStrategy(kind), rng)


def test_round_robin_counts():
    res = round_robin([("allc", _factory("allc")), ("alld", _factory("alld"))], 1, 10)
    assert len(res.matches) == 4
    assert res.games == {"allc": 4, "alld": 4}
    # AllD wins both games against AllC and fails both self-play sides.
    assert res.successes == {"allc": 2, "alld": 2}
    assert res.pair_average("alld", "allc") == 5.0
    assert res.pair_average("alld", "alld") == 1.0
    no_self = round_robin([("allc", _factory("allc")), ("alld", _factory("alld"))], 3, 10,
                          include_self_play=False)
    assert len(no_self.matches) == 6


def test_round_robin_deterministic():
    strategies = [("random", _factory("random")), ("tft", _factory("tft")),
                  ("etl", lambda rng: EtlAgent(2, map_signals_ipd, rng, EtlParams()))]
    a = round_robin(strategies, 2, 50, master_seed=9)
    b = round_robin(strategies, 2, 50, master_seed=9)
    assert [(x, y, m.moves) for x, y, m in a.matches] == [(x, y, m.moves) for x, y, m in b.matches]
    assert a.successes == b.successes


def test_round_robin_needs_two():
    with pytest.raises(UsageError):
        round_robin([("allc", _factory("allc"))], 1, 10)


@given(st.integers(0, 2**32), st.sampled_from(["allc", "alld", "random", "tft", "delayed_coop", "delayed_defect"]),
       st.sampled_from(["allc", "alld", "random", "tft", "delayed_coop", "delayed_defect"]), st.integers(1, 60))
def test_totals_equal_replayed_log(seed, a, b, rounds):
    res = play_match(player(a, 5, seed), player(b, 7, seed + 1), rounds)
    replay = [payoff(x, y) for x, y in res.moves]
    assert res.totals == (sum(p[0] for p in replay), sum(p[1] for p in replay))
    assert res.rounds == rounds == len(res.moves)
