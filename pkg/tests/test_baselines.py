import math

import pytest

from etl_lab.baselines import (
    FixedStrategyPlayer,
    ForcedGreedyWrapper,
    IpdStrategy,
    McControlAgent,
    QLearnerAgent,
    ipd_strategy_action,
    mc_update,
    q_learning_update,
)
from etl_lab.core import RngStream, Transition, UsageError
from etl_lab.envs.tower import TowerEnv
from etl_lab.signals import COOPERATE, DEFECT

from .stats import within_three_sigma


def test_q_update_examples():
    a = QLearnerAgent(2, RngStream(0))
    q_learning_update(a, Transition("s", 0, 1.0, "s2", False))
    assert math.isclose(a.q["s", 0], 0.1)
    b = QLearnerAgent(2, RngStream(0))
    b.q["s", 0] = 1.0
    b.q["s2", 1] = 1.0
    q_learning_update(b, Transition("s", 0, 0.0, "s2", False))
    assert math.isclose(b.q["s", 0], 0.995)
    c = QLearnerAgent(2, RngStream(0))
    c.q["s2", 0] = 100.0
    q_learning_update(c, Transition("s", 0, -1.0, "s2", True))
    assert math.isclose(c.q["s", 0], -0.1)


def test_q_learner_exploration_rate():
    a = QLearnerAgent(2, RngStream(3), epsilon=0.1)
    a.q["s", 1] = 1.0
    picks = [a.act("s") for _ in range(10_000)]
    assert within_three_sigma([picks.count(0), picks.count(1)], [0.05, 0.95])


def test_mc_examples():
    a = McControlAgent(2, RngStream(0))
    mc_update(a, [Transition("s", 0, 2.0, None, True)])
    assert a.q["s", 0] == 2.0
    b = McControlAgent(2, RngStream(0))
    mc_update(b, [Transition("a", 0, 0.0, "b", False), Transition("b", 1, 1.0, None, True)])
    assert math.isclose(b.q["a", 0], 0.95)
    c = McControlAgent(2, RngStream(0))
    mc_update(c, [Transition("s", 0, 1.0, "s", False), Transition("s", 0, 5.0, None, True)])
    assert c.counts[("s", 0)] == 1
    assert math.isclose(c.q["s", 0], 1.0 + 0.95 * 5.0)


def test_mc_running_mean_over_episodes():
    a = McControlAgent(2, RngStream(0))
    mc_update(a, [Transition("s", 0, 2.0, None, True)])
    mc_update(a, [Transition("s", 0, 4.0, None, True)])
    assert a.q["s", 0] == 3.0


def test_mc_incomplete_episode():
    with pytest.raises(UsageError):
        mc_update(McControlAgent(2, RngStream(0)), [Transition("s", 0, 1.0, "s", False)])
    with pytest.raises(UsageError):
        mc_update(McControlAgent(2, RngStream(0)), [])


def test_strategy_examples():
    tft = IpdStrategy("tft")
    assert ipd_strategy_action(tft, 1, None) == COOPERATE
    assert ipd_strategy_action(tft, 2, DEFECT) == DEFECT
    dd = IpdStrategy("delayed_defect", 50)
    assert ipd_strategy_action(dd, 50, None) == DEFECT
    assert ipd_strategy_action(dd, 51, None) == COOPERATE
    dc = IpdStrategy("delayed_coop", 50)
    assert ipd_strategy_action(dc, 50, None) == COOPERATE
    assert ipd_strategy_action(dc, 51, None) == DEFECT
    alld = IpdStrategy("alld")
    assert all(ipd_strategy_action(alld, r, COOPERATE) == DEFECT for r in range(1, 100))
    assert ipd_strategy_action(IpdStrategy("allc"), 7, DEFECT) == COOPERATE


def test_random_strategy_is_fair():
    rng = RngStream(11)
    s = IpdStrategy("random")
    picks = [ipd_strategy_action(s, 1, None, rng) for _ in range(10_000)]
    assert within_three_sigma([picks.count(COOPERATE), picks.count(DEFECT)])


def test_strategy_validation():
    with pytest.raises(ValueError):
        IpdStrategy("grim")
    with pytest.raises(ValueError):
        IpdStrategy("delayed_coop", 0)
    with pytest.raises(UsageError):
        ipd_strategy_action(IpdStrategy("allc"), 0, None)
    assert IpdStrategy("delayed_coop", 7).name == "delayed_coop:7"


def test_fixed_player_round_counter_resets():
    p = FixedStrategyPlayer(IpdStrategy("delayed_defect", 1), RngStream(0))
    from etl_lab.signals import IpdObservation
    assert p.act(0, IpdObservation(None, None)) == DEFECT
    assert p.act(0, IpdObservation(DEFECT, COOPERATE)) == COOPERATE
    p.end_episode()
    assert p.act(0, IpdObservation(None, None)) == DEFECT


class _Recorder:
    def __init__(self):
        self.seen = 0
        self.episodes = 0

    def act(self, state, obs):
        return 0

    def observe(self, t, obs=None):
        self.seen += 1

    def end_episode(self):
        self.episodes += 1


def test_forced_greedy_wrapper():
    inner = [_Recorder() for _ in range(4)]
    agents = [ForcedGreedyWrapper(r, 2) for r in inner]
    env = TowerEnv()
    rng = RngStream(0)
    acts = []
    orig = [a.act for a in agents]
    for a, f in zip(agents, orig):
        a.act = (lambda f: lambda s, o: acts.append(f(s, o)) or acts[-1])(f)
    for _ in range(2):
        env.play(agents, rng)
    assert acts and set(acts) == {2}
    assert all(r.seen > 0 for r in inner)
    acts.clear()
    env.play(agents, rng)
    assert set(acts) == {0}
    assert all(r.episodes == 3 for r in inner)
    assert not agents[0].forcing


def test_forced_greedy_zero_is_transparent():
    w = ForcedGreedyWrapper(QLearnerAgent(3, RngStream(0)), 0)
    assert not w.forcing
    assert w.epsilon == 0.1  # attributes reach the inner agent
    with pytest.raises(ValueError):
        ForcedGreedyWrapper(_Recorder(), -1)


def test_learners_deterministic():
    def trace(cls):
        a = cls(3, RngStream(4))
        env = TowerEnv()
        rng = RngStream(5)
        agents = [a] + [cls(3, RngStream(10 + i)) for i in range(3)]
        return [repr(env.play(agents, rng)) for _ in range(20)]

    for cls in (QLearnerAgent, McControlAgent):
        assert trace(cls) == trace(cls)
