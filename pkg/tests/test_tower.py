import itertools
import math

import pytest
from hypothesis import given, settings, strategies as st

from etl_lab.core import RngStream, UsageError
from etl_lab.envs.tower import (
    TowerConfig,
    TowerEnv,
    TowerState,
    episode_success,
    hunger_update,
    reassign_floors,
    tower_reward,
    tower_round,
)

from .stats import chi_square, within_three_sigma

CFG = TowerConfig()


class KeepOrder:
    """Stand-in stream whose Fisher-Yates shuffle is the identity."""

    def random(self):
        return 0.999999

    def permutation(self, n):
        return list(range(n))


def _state(floors=(3, 2, 1, 0), hunger=0.0):
    return TowerState([hunger] * 4, list(floors), [True] * 4)


def test_all_one_round():
    st_ = _state()
    res = tower_round(st_, CFG, lambda i, o: 1, KeepOrder())
    assert res.consumed == [1, 1, 1, 1]
    assert res.food_trace == [4, 3, 2, 1, 0]
    assert res.rewards == [1.0, 1.0, 1.0, 1.0]


def test_all_two_round():
    st_ = _state()
    res = tower_round(st_, CFG, lambda i, o: 2, KeepOrder())
    # agent 0 is on the top floor
    assert res.consumed == [2, 2, 0, 0]
    assert st_.hunger == [0.0, 0.0, 1.0, 1.0]


def test_hunger_and_reward_examples():
    assert hunger_update(3.0, 1, TowerConfig(h_max=10.0)) == 2.0
    assert hunger_update(0.0, 2, CFG) == 0.0
    assert hunger_update(2.5, 0, CFG) == 3.0
    assert tower_reward(2, 0.0, CFG) == 2.0
    assert tower_reward(1, CFG.h_max, CFG) == -1.0
    assert tower_reward(0, 1.0, CFG) == 0.0
    with pytest.raises(UsageError):
        tower_reward(3, 0.0, CFG)


def test_invalid_choice():
    with pytest.raises(UsageError):
        tower_round(_state(), CFG, lambda i, o: 5, KeepOrder())


def test_reassign_is_uniform():
    rng = RngStream(2024)
    counts = {p: 0 for p in itertools.permutations(range(4))}
    st_ = _state()
    for _ in range(10_000):
        counts[tuple(reassign_floors(st_, rng).floor_of_agent)] += 1
    cells = list(counts.values())
    assert within_three_sigma(cells)
    assert chi_square(cells) < 49.7  # 0.1% critical value, 23 dof


def test_reassign_deterministic():
    a, b = RngStream(1), RngStream(1)
    sa, sb = _state(), _state()
    assert [list(reassign_floors(sa, a).floor_of_agent) for _ in range(20)] == \
           [list(reassign_floors(sb, b).floor_of_agent) for _ in range(20)]


def test_episode_success():
    st_ = _state()
    assert episode_success(st_)
    st_.alive[2] = False
    assert not episode_success(st_)


def _episode(policy, rng, config=CFG):
    st_ = TowerState.fresh(config, rng)
    for _ in range(config.rounds_per_episode):
        tower_round(st_, config, policy, rng)
    return st_


def test_all_one_never_dies():
    rng = RngStream(3)
    for _ in range(200):
        assert episode_success(_episode(lambda i, o: 1, rng))


def test_all_two_kills_within_bound_when_floors_fixed():
    bound = math.ceil(CFG.h_max / CFG.delta_h)
    st_ = _state(floors=(0, 1, 2, 3))  # the stub keeps this layout every round
    rounds = 0
    while all(st_.alive):
        tower_round(st_, CFG, lambda i, o: 2, KeepOrder())
        rounds += 1
    assert rounds <= bound


def test_all_two_kills_under_reassignment():
    rng = RngStream(4)
    assert not any(episode_success(_episode(lambda i, o: 2, rng)) for _ in range(500))


def test_dead_agents_are_skipped():
    st_ = _state()
    st_.alive[0] = False  # top floor empty
    res = tower_round(st_, CFG, lambda i, o: 2, KeepOrder())
    assert res.rewards[0] is None
    assert res.consumed == [0, 2, 2, 0]


def test_env_episode_metrics():
    class One:
        def act(self, s, o):
            return 1

        def observe(self, t, o=None):
            pass

        def end_episode(self):
            pass

    m = TowerEnv().play([One() for _ in range(4)], RngStream(0))
    assert m.extra["success"] and m.extra["deaths"] == 0
    assert m.returns == [20.0] * 4
    assert m.extra["mean_trust"] is None


def test_config_validation():
    with pytest.raises(ValueError):
        TowerConfig(floors=1)
    with pytest.raises(ValueError):
        TowerConfig(platform_food=-1)
    with pytest.raises(ValueError):
        TowerConfig(initial_hunger=3.0)


choices = st.lists(st.integers(0, 2), min_size=4, max_size=4)


@settings(max_examples=10_000)
@given(st.lists(st.floats(0, 2.99), min_size=4, max_size=4), st.permutations(range(4)),
       st.lists(st.booleans(), min_size=4, max_size=4), choices)
def test_round_invariants(hunger, floors, alive, picks):
    st_ = TowerState(list(hunger), list(floors), list(alive))
    was_alive = list(alive)
    res = tower_round(st_, CFG, lambda i, o: picks[i], KeepOrder())
    assert math.isclose(sum(res.consumed) + res.food_trace[-1], CFG.platform_food)
    food = CFG.platform_food
    for f in range(3, -1, -1):
        i = floors.index(f)
        assert res.consumed[i] <= min(2, food)
        food -= res.consumed[i]
    for i in range(4):
        assert 0.0 <= st_.hunger[i] <= CFG.h_max
        if not was_alive[i]:
            assert not st_.alive[i] and res.consumed[i] == 0
