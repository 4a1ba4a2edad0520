import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from croprl.errors import ConfigError
from croprl.replay import ReplayBuffer, Transition


def test_push_and_length():
    buf = ReplayBuffer(capacity=4, obs_dim=2)
    assert len(buf) == 0
    buf.push(np.zeros(2), 1, 0.5, np.ones(2), False)
    assert len(buf) == 1


def test_sampling_requires_enough_items():
    buf = ReplayBuffer(capacity=4, obs_dim=2)
    buf.push(np.zeros(2), 0, 0.0, np.zeros(2), False)
    with pytest.raises(ConfigError):
        buf.sample(2, np.random.default_rng(0))


def test_sample_shapes():
    buf = ReplayBuffer(capacity=16, obs_dim=3)
    for i in range(10):
        buf.push(np.full(3, i), i % 5, float(i), np.full(3, i + 1), i == 9)
    obs, actions, rewards, next_obs, dones = buf.sample(6, np.random.default_rng(1))
    assert obs.shape == (6, 3)
    assert next_obs.shape == (6, 3)
    assert actions.shape == rewards.shape == dones.shape == (6,)


def test_push_transition_namedtuple():
    buf = ReplayBuffer(capacity=2, obs_dim=1)
    buf.push_transition(Transition(np.array([1.0]), 2, 3.0, np.array([4.0]), True))
    obs, actions, rewards, next_obs, dones = buf.contents()
    assert obs[0, 0] == 1.0 and actions[0] == 2 and dones[0]


@given(capacity=st.integers(1, 32), n_pushes=st.integers(1, 120))
@settings(max_examples=60, deadline=None)
def test_fifo_eviction_property(capacity, n_pushes):
    """After n > capacity pushes the newest `capacity` items remain, oldest
    first."""
    buf = ReplayBuffer(capacity=capacity, obs_dim=1)
    for i in range(n_pushes):
        buf.push(np.array([float(i)]), i, float(i), np.array([float(i)]), False)
    assert len(buf) == min(capacity, n_pushes)
    obs, actions, _, _, _ = buf.contents()
    first_kept = max(0, n_pushes - capacity)
    assert list(actions) == list(range(first_kept, n_pushes))
    assert obs[0, 0] == float(first_kept)
