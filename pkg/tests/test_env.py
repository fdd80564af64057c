import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vitalrl.errors import ConfigurationError, DomainError, EpisodeCompleteError
from vitalrl.env import EpisodeConfig, discounted_return, make_env
from vitalrl.mews import VitalKind, classify
from vitalrl.rewards import reward

HR, RR, TEMP = VitalKind.HEART_RATE, VitalKind.RESPIRATORY_RATE, VitalKind.TEMPERATURE


def streams(n, seed=0):
    rng = np.random.default_rng(seed)
    return {
        HR: rng.uniform(30, 160, n),
        RR: rng.uniform(2, 40, n),
        TEMP: rng.uniform(33, 40, n),
    }


def test_three_agents():
    env = make_env(streams(101), EpisodeConfig(100))
    assert len(env) == 3
    assert all(env[v].monitor_length == 100 for v in (HR, RR, TEMP))


def test_single_agent():
    env = make_env({HR: np.full(11, 72.0)}, EpisodeConfig(10))
    assert env.agents == [HR]


def test_short_stream_rejected():
    with pytest.raises(ConfigurationError):
        make_env({HR: np.full(5, 72.0)}, EpisodeConfig(10))


def test_length_mismatch_rejected():
    with pytest.raises(ConfigurationError):
        make_env({HR: np.full(12, 72.0), RR: np.full(11, 16.0)}, EpisodeConfig(10))


def test_missing_vital_rejected():
    with pytest.raises(ConfigurationError):
        make_env({HR: np.full(12, 72.0)}, EpisodeConfig(10), vitals=[RR])


def test_sedation_has_no_agent():
    with pytest.raises(ConfigurationError):
        make_env({VitalKind.SEDATION: np.zeros(12)}, EpisodeConfig(10))


def test_episode_config_validation():
    with pytest.raises(ConfigurationError):
        EpisodeConfig(10, gamma=1.0)
    with pytest.raises(ConfigurationError):
        EpisodeConfig(10, episodes=0)


def test_reset_contract():
    env = make_env({HR: np.array([72.0, 80, 90, 100])}, EpisodeConfig(3))
    first = env.reset(HR)
    assert first.time_index == 0 and first.raw_value == 72.0
    env.step(HR, 0)
    env.step(HR, 1)
    again = env.reset(HR)
    assert again == first == env.reset(HR)
    assert env.episode_score(HR) == 0


def test_observation_normalized():
    env = make_env({HR: np.array([20.0, 130.0, 240.0, 300.0])}, EpisodeConfig(3))
    obs = env.reset(HR)
    assert obs.norm_value == 0.0
    assert [env.step(HR, 0)[0].norm_value for _ in range(3)] == [0.5, 1.0, 1.0]


def test_step_rewards_heart_rate_139():
    env = make_env({HR: np.array([139.0, 139.0, 75.0])}, EpisodeConfig(2))
    env.reset(HR)
    nxt, r, done = env.step(HR, 3)
    assert r == 10 and not done and nxt.time_index == 1
    _, r, done = env.step(HR, 0)
    assert r == -3 and done


def test_horizon_one():
    env = make_env({HR: np.array([72.0, 72.0])}, EpisodeConfig(1))
    env.reset(HR)
    assert env.step(HR, 4)[2] is True
    with pytest.raises(EpisodeCompleteError):
        env.step(HR, 0)


def test_horizon_exact():
    n = 7
    env = make_env({HR: np.full(n + 1, 72.0)}, EpisodeConfig(n))
    env.reset(HR)
    flags = [env.step(HR, 0)[2] for _ in range(n)]
    assert flags == [False] * (n - 1) + [True]
    with pytest.raises(EpisodeCompleteError):
        env.step(HR, 0)


def test_episode_score_summation():
    # bands: 139 -> 3, 139 -> 3, 75 -> 0; actions 3, 3, 1 -> 10 + 10 - 1
    env = make_env({HR: np.array([139.0, 139.0, 75.0, 75.0])}, EpisodeConfig(3))
    env.reset(HR)
    for a in (3, 3, 1):
        env.step(HR, a)
    assert env.episode_score(HR) == 19


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_max_episode_score_by_enumeration(n):
    values = np.array([30.0, 139.0, 75.0, 105.0, 120.0, 200.0])[: n + 1]
    env = make_env({HR: values}, EpisodeConfig(n))
    best = -np.inf
    for actions in itertools.product(range(5), repeat=n):
        env.reset(HR)
        for a in actions:
            env.step(HR, a)
        best = max(best, env.episode_score(HR))
    assert best == 10 * n


def test_zero_steps_score():
    env = make_env({HR: np.full(3, 72.0)}, EpisodeConfig(2))
    env.reset(HR)
    assert env.episode_score(HR) == 0


def test_isolation_joint_vs_alone():
    s = streams(51, seed=3)
    rng = np.random.default_rng(9)
    actions = {v: rng.integers(0, 5, 50) for v in s}

    def trajectory(env, v):
        out = [env.reset(v)]
        for a in actions[v]:
            obs, r, done = env.step(v, int(a))
            out.append((obs, r, done))
        return out

    joint = make_env(s, EpisodeConfig(50))
    joint_traj = {v: [] for v in s}
    for v in s:
        joint_traj[v].append(joint.reset(v))
    for t in range(50):
        for v in s:
            joint_traj[v].append(joint.step(v, int(actions[v][t])))
    for v in s:
        alone = make_env({v: s[v]}, EpisodeConfig(50))
        assert trajectory(alone, v) == joint_traj[v]


def test_reward_consistency_random_draws():
    rng = np.random.default_rng(1234)
    for _ in range(1000):
        vital = [HR, RR, TEMP][rng.integers(3)]
        lo, hi = {HR: (10, 250), RR: (0, 60), TEMP: (30, 43)}[vital]
        values = rng.uniform(lo, hi, 2)
        a = int(rng.integers(5))
        env = make_env({vital: values}, EpisodeConfig(1))
        env.reset(vital)
        _, r, _ = env.step(vital, a)
        assert r == reward(classify(vital, values[0]), a)


def test_accounting_matches_step_rewards():
    s = streams(201, seed=5)
    env = make_env(s, EpisodeConfig(200))
    rng = np.random.default_rng(0)
    for v in s:
        env.reset(v)
        total = sum(env.step(v, int(rng.integers(5)))[1] for _ in range(200))
        assert env.episode_score(v) == total


def test_window_features():
    env = make_env({HR: np.array([20.0, 130.0, 240.0, 130.0])}, EpisodeConfig(3), window=3)
    assert env.reset(HR).features == (0.0, 0.0, 0.0)
    assert env.step(HR, 0)[0].features == (0.0, 0.0, 0.5)
    assert env.step(HR, 0)[0].features == (0.0, 0.5, 1.0)
    assert env.step(HR, 0)[0].features == (0.5, 1.0, 0.5)


def test_discounted_return_examples():
    assert discounted_return([10, 10], 0.5) == 15.0
    assert discounted_return([7, -3, 4], 0.0) == 7.0
    closed_form = 10 * (1 - 0.9 ** 20) / 0.1
    assert discounted_return([10] * 20, 0.9) == pytest.approx(closed_form, rel=1e-12)


@pytest.mark.parametrize("gamma", [1.0, -0.1, 1.5, float("nan")])
def test_discounted_return_domain(gamma):
    with pytest.raises(DomainError):
        discounted_return([1], gamma)


@settings(max_examples=50)
@given(st.lists(st.integers(-4, 10), max_size=30), st.floats(0, 0.99))
def test_discounted_return_matches_power_sum(rewards, gamma):
    expected = sum(r * gamma ** t for t, r in enumerate(rewards))
    assert discounted_return(rewards, gamma) == pytest.approx(expected, abs=1e-9)
