import numpy as np
import pytest

from croprl.env import NitrogenEnv, florida_scenario, iowa_scenario


@pytest.fixture(scope="session")
def iowa_env():
    return NitrogenEnv(iowa_scenario())


@pytest.fixture(scope="session")
def florida_env():
    return NitrogenEnv(florida_scenario())


def rollout(env, policy=None, seed=0):
    """Run an episode to completion; returns (total_reward, final_state)."""
    state = env.reset(seed=seed)
    total = 0.0
    while not env.done:
        amount = policy(state) if policy else 0.0
        result = env.step(amount)
        total += result.reward
        state = result.next_state
    return total, state


@pytest.fixture
def random_action_sequence():
    rng = np.random.default_rng(1234)

    def policy(state):
        return float(rng.choice([0.0, 40.0, 80.0, 120.0, 160.0]))
    return policy
