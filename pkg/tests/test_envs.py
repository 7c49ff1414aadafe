import math

import numpy as np
import pytest

from twtlrl.envs import LanderEnv, PendulumEnv, make_env
from twtlrl.seeding import substream


def test_make_env_kinds():
    assert isinstance(make_env("pendulum"), PendulumEnv)
    assert isinstance(make_env("lander"), LanderEnv)
    with pytest.raises(ValueError):
        make_env("cartpole")


def test_reset_before_step_required():
    env = PendulumEnv()
    with pytest.raises(RuntimeError):
        env.step(1)


def test_reset_determinism():
    env = PendulumEnv()
    s1 = env.reset(rng=substream(3, "env"))
    s2 = env.reset(rng=substream(3, "env"))
    assert np.array_equal(s1, s2)


def test_pendulum_torque_free_fixed_point():
    env = PendulumEnv()
    state = np.array([0.0, 0.0])
    nxt = env.dynamics(state, 1)  # zero torque at the unstable equilibrium
    assert np.array_equal(nxt, state)


def test_pendulum_gravity_pulls_over():
    env = PendulumEnv()
    state = np.array([0.3, 0.0])
    for _ in range(60):
        state = env.dynamics(state, 1)
        if abs(state[0]) > math.pi / 2:
            break
    assert abs(state[0]) > math.pi / 2  # no-torque policy falls


def test_pendulum_termination_and_reward():
    env = PendulumEnv(episode_len=5, upright_tail=3)
    env.reset(rng=substream(0, "env"))
    reward = 0.0
    for _ in range(5):
        res = env.step(1)
        reward += res.base_reward
        if res.terminated or res.truncated:
            break
    # started near upright, stayed within the band for all 5 steps
    assert res.truncated and reward == 1.0


def test_pendulum_invalid_action():
    env = PendulumEnv()
    env.reset(rng=substream(0, "env"))
    with pytest.raises(ValueError):
        env.step(5)


def test_lander_free_fall_matches_closed_form():
    env = LanderEnv()
    state = np.array([0.0, 1.4, 0.0, 0.0, 0.0, 0.0])
    n = 10
    for _ in range(n):
        state = env.dynamics(state, 0)
    # semi-implicit Euler: v_k = -g k dt, y_k = y0 - g dt^2 k(k+1)/2
    dt, g = env.dt, env.gravity
    assert state[3] == pytest.approx(-g * n * dt)
    assert state[1] == pytest.approx(1.4 - g * dt * dt * n * (n + 1) / 2)


def test_lander_main_engine_thrusts_up():
    env = LanderEnv()
    state = np.array([0.0, 1.4, 0.0, 0.0, 0.0, 0.0])
    nxt = env.dynamics(state, 2)
    assert nxt[3] == pytest.approx(env.dt * (env.main_thrust - env.gravity))
    assert nxt[2] == pytest.approx(0.0)


def test_lander_side_thrusters_torque_sign():
    env = LanderEnv()
    state = np.zeros(6)
    state[1] = 1.0
    left = env.dynamics(state, 1)
    right = env.dynamics(state, 3)
    assert left[5] > 0 > right[5]
    assert left[2] > 0 > right[2]


def test_lander_touchdown_rewards():
    env = LanderEnv()
    env.reset(rng=substream(1, "env"))
    env.state = np.array([0.0, 0.001, 0.0, -0.02, 0.0, 0.0])
    res = env.step(0)
    assert res.terminated and res.base_reward == 100.0

    env.reset(rng=substream(1, "env"))
    env.state = np.array([0.0, 0.01, 0.0, -2.0, 0.0, 0.0])
    res = env.step(0)
    assert res.terminated and res.base_reward == -100.0


def test_lander_truncates_at_episode_len():
    env = LanderEnv(episode_len=3, gravity=0.0)
    env.reset(rng=substream(2, "env"))
    for i in range(3):
        res = env.step(0)
    assert res.truncated and not res.terminated


def test_step_trajectories_are_deterministic():
    def run():
        env = make_env("pendulum")
        s = env.reset(rng=substream(9, "env"))
        out = [s.copy()]
        for a in [0, 1, 2, 2, 1, 0, 1]:
            out.append(env.step(a).next_state.copy())
        return np.array(out)

    assert np.array_equal(run(), run())
