"""Core interface: spaces, step/reset protocol, seeding, returns."""
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rlnoise.core import (
    ActionOutOfSpaceError,
    Continuous,
    Discrete,
    EpisodeFinishedError,
    InvalidConfigError,
    ObservationSpace,
    StepResult,
    episodic_return,
)
from rlnoise.envs import PointMass

from helpers import Counter


class TestObservationSpace:
    def test_dims_must_be_positive(self):
        with pytest.raises(InvalidConfigError):
            ObservationSpace(0)

    def test_bounds_length_checked(self):
        with pytest.raises(InvalidConfigError):
            ObservationSpace(2, lower=[0.0])
        with pytest.raises(InvalidConfigError):
            ObservationSpace(2, lower=[0.0, 0.0], upper=[1.0])

    def test_bounds_order_checked(self):
        with pytest.raises(InvalidConfigError):
            ObservationSpace(1, lower=[1.0], upper=[0.0])

    def test_contains(self):
        space = ObservationSpace(2, lower=[0.0, 0.0], upper=[4.0, 4.0])
        assert space.contains([0.0, 4.0])
        assert not space.contains([5.0, 0.0])
        assert not space.contains([1.0])

    def test_clip(self):
        space = ObservationSpace(2, lower=[0.0, 0.0], upper=[4.0, 4.0])
        np.testing.assert_array_equal(space.clip(np.array([-1.0, 9.0])), [0.0, 4.0])

    def test_clip_unbounded_is_noop(self):
        space = ObservationSpace(3)
        obs = np.array([1e9, -1e9, 0.0])
        assert space.clip(obs) is obs


class TestDiscrete:
    def test_needs_at_least_one_action(self):
        with pytest.raises(InvalidConfigError):
            Discrete(0)

    def test_validate_accepts_ints(self):
        space = Discrete(3)
        assert space.validate(2) == 2
        assert space.validate(np.int64(0)) == 0

    @pytest.mark.parametrize("bad", [-1, 3, 1.0, "1", True])
    def test_validate_rejects(self, bad):
        with pytest.raises(ActionOutOfSpaceError):
            Discrete(3).validate(bad)

    def test_sample_in_range(self):
        rng = np.random.default_rng(0)
        space = Discrete(4)
        draws = {space.sample(rng) for _ in range(100)}
        assert draws <= {0, 1, 2, 3}
        assert len(draws) == 4


class TestContinuous:
    def test_bounds_must_be_finite(self):
        with pytest.raises(InvalidConfigError):
            Continuous([-np.inf], [1.0])

    def test_bounds_must_match(self):
        with pytest.raises(InvalidConfigError):
            Continuous([0.0, 0.0], [1.0])

    def test_bounds_must_be_ordered(self):
        with pytest.raises(InvalidConfigError):
            Continuous([2.0], [1.0])

    def test_validate(self):
        space = Continuous([-1.0, -1.0], [1.0, 1.0])
        action = space.validate([0.5, -0.5])
        np.testing.assert_array_equal(action, [0.5, -0.5])
        with pytest.raises(ActionOutOfSpaceError):
            space.validate([2.0, 0.0])
        with pytest.raises(ActionOutOfSpaceError):
            space.validate([0.0])

    def test_clip_and_sample(self):
        space = Continuous([-1.0], [1.0])
        np.testing.assert_array_equal(space.clip([5.0]), [1.0])
        rng = np.random.default_rng(3)
        for _ in range(50):
            a = space.sample(rng)
            assert -1.0 <= a[0] <= 1.0


class TestEpisodeProtocol:
    def test_step_before_reset_raises(self):
        with pytest.raises(EpisodeFinishedError):
            Counter().step(0)

    def test_step_after_termination_raises(self):
        env = Counter(terminal_at=2)
        env.reset(seed=0)
        env.step(0)
        result = env.step(0)
        assert result.terminated and not result.truncated
        with pytest.raises(EpisodeFinishedError):
            env.step(0)

    def test_step_after_truncation_raises(self):
        env = Counter(horizon=2)
        env.reset(seed=0)
        env.step(0)
        result = env.step(0)
        assert result.truncated and not result.terminated
        with pytest.raises(EpisodeFinishedError):
            env.step(0)

    def test_truncates_exactly_at_horizon(self):
        env = Counter(horizon=5)
        env.reset(seed=0)
        flags = [env.step(0).truncated for _ in range(5)]
        assert flags == [False, False, False, False, True]

    def test_termination_wins_over_truncation(self):
        env = Counter(horizon=3, terminal_at=3)
        env.reset(seed=0)
        env.step(0)
        env.step(0)
        result = env.step(0)
        assert result.terminated and not result.truncated

    def test_reset_mid_episode_abandons(self):
        env = Counter(horizon=10)
        env.reset(seed=0)
        env.step(0)
        obs = env.reset()
        np.testing.assert_array_equal(obs, [0.0])
        assert env.step(0).observation[0] == 1.0

    def test_invalid_action_leaves_episode_intact(self):
        env = Counter(horizon=10)
        env.reset(seed=0)
        with pytest.raises(ActionOutOfSpaceError):
            env.step(5)
        assert env.step(0).observation[0] == 1.0

    def test_seeded_replay_is_identical(self):
        actions = [np.array([a]) for a in (0.5, -0.3, 1.0, 0.0, -1.0)]
        first, second = PointMass(start_noise=0.5), PointMass(start_noise=0.5)
        obs_a = first.reset(seed=42)
        obs_b = second.reset(seed=42)
        np.testing.assert_array_equal(obs_a, obs_b)
        for action in actions:
            ra, rb = first.step(action), second.step(action)
            np.testing.assert_array_equal(ra.observation, rb.observation)
            assert ra.reward == rb.reward

    def test_unseeded_reset_continues_the_stream(self):
        env = PointMass(start_noise=0.5)
        starts = {float(env.reset(seed=7)[0])}
        for _ in range(5):
            starts.add(float(env.reset()[0]))
        assert len(starts) > 1

    def test_step_result_fields(self):
        result = StepResult(np.array([1.0]), -1.0, False, True, {"k": 1})
        assert result.reward == -1.0
        swapped = result._replace(reward=2.0)
        assert swapped.reward == 2.0
        assert swapped.observation is result.observation


class TestEpisodicReturn:
    def test_empty_is_zero(self):
        assert episodic_return([]) == 0.0

    def test_undiscounted_sum(self):
        assert episodic_return([1.0, 2.0, 3.0]) == 6.0

    def test_discounted(self):
        assert episodic_return([1.0, 1.0, 1.0], gamma=0.5) == pytest.approx(1.75)

    @pytest.mark.parametrize("gamma", [0.0, -0.1, 1.5])
    def test_gamma_range(self, gamma):
        with pytest.raises(InvalidConfigError):
            episodic_return([1.0], gamma=gamma)

    def test_gamma_one_permitted(self):
        assert episodic_return([2.0, 2.0], gamma=1.0) == 4.0

    @given(
        rewards=st.lists(st.floats(-100, 100), min_size=1, max_size=20),
        gamma=st.floats(0.1, 1.0),
    )
    def test_recursion_property(self, rewards, gamma):
        total = episodic_return(rewards, gamma)
        rest = episodic_return(rewards[1:], gamma)
        assert total == pytest.approx(rewards[0] + gamma * rest, rel=1e-9, abs=1e-9)
