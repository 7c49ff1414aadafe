"""Native episodic environments: inverted pendulum and planar lander.

Both use semi-implicit Euler integration and expose the observation as the
raw state (the labeling map is the identity).  Rewards are deliberately
sparse and delayed: the pendulum pays out only at episode end, the lander
only at touchdown.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["StepResult", "PendulumEnv", "LanderEnv", "make_env", "ENV_KINDS"]


@dataclass(frozen=True)
class StepResult:
    next_state: np.ndarray
    base_reward: float
    terminated: bool
    truncated: bool


def _wrap_angle(theta: float) -> float:
    """Wrap to (-pi, pi]."""
    theta = (theta + math.pi) % (2.0 * math.pi) - math.pi
    return math.pi if theta == -math.pi else theta


class PendulumEnv:
    """Inverted pendulum balanced near the upright unstable equilibrium.

    State (theta, theta_dot); actions apply torque {-tau, 0, +tau}.
    Reward: +1 at truncation if the pendulum was upright (|theta| <=
    upright_angle) for the final ``upright_tail`` steps, else 0.  Falling
    past pi/2 terminates the episode with no reward.
    """

    kind = "pendulum"
    obs_dim = 2
    n_actions = 3

    def __init__(self, dt: float = 0.05, gravity: float = 9.8,
                 length: float = 1.0, mass: float = 1.0, torque: float = 2.0,
                 episode_len: int = 200, upright_angle: float = 0.2,
                 upright_tail: int = 50):
        self.dt = dt
        self.gravity = gravity
        self.length = length
        self.mass = mass
        self.torque = torque
        self.episode_len = episode_len
        self.upright_angle = upright_angle
        self.upright_tail = upright_tail
        self.state: np.ndarray | None = None
        self.t = 0
        self._upright_streak = 0

    def reset(self, seed: int | None = None,
              rng: np.random.Generator | None = None) -> np.ndarray:
        if rng is None:
            rng = np.random.default_rng(seed)
        self.state = rng.uniform(-0.05, 0.05, size=2)
        self.t = 0
        self._upright_streak = 1 if abs(self.state[0]) <= self.upright_angle else 0
        return self.state.copy()

    def dynamics(self, state: np.ndarray, action: int) -> np.ndarray:
        if action not in (0, 1, 2):
            raise ValueError(f"invalid pendulum action {action}")
        theta, theta_dot = float(state[0]), float(state[1])
        u = (action - 1) * self.torque
        accel = (self.gravity / self.length) * math.sin(theta) \
            + u / (self.mass * self.length ** 2)
        theta_dot = theta_dot + self.dt * accel
        theta = _wrap_angle(theta + self.dt * theta_dot)
        return np.array([theta, theta_dot])

    def step(self, action: int) -> StepResult:
        if self.state is None:
            raise RuntimeError("reset() before step()")
        state = self.dynamics(self.state, action)
        self.t += 1
        if abs(state[0]) <= self.upright_angle:
            self._upright_streak += 1
        else:
            self._upright_streak = 0
        terminated = abs(state[0]) > math.pi / 2
        truncated = (not terminated) and self.t >= self.episode_len
        reward = 0.0
        if truncated and self._upright_streak >= self.upright_tail:
            reward = 1.0
        self.state = state
        if terminated or truncated:
            self.state = None
        return StepResult(state, reward, terminated, truncated)

    @staticmethod
    def label(state: np.ndarray) -> np.ndarray:
        return np.asarray(state, dtype=float)


class LanderEnv:
    """Planar rigid-body lander with analytic dynamics.

    State (px, py, vx, vy, angle, angular_rate); actions are
    {0: noop, 1: left thruster, 2: main engine, 3: right thruster}.
    Reward: +100 on touchdown with |velocity| < 0.1 and |angle| < 0.1,
    -100 on any other touchdown, 0 elsewhere.
    """

    kind = "lander"
    obs_dim = 6
    n_actions = 4

    def __init__(self, dt: float = 0.05, gravity: float = 1.0,
                 main_thrust: float = 1.8, side_thrust: float = 0.6,
                 side_torque: float = 1.2, spawn_height: float = 1.4,
                 episode_len: int = 500, soft_speed: float = 0.1,
                 soft_angle: float = 0.1):
        self.dt = dt
        self.gravity = gravity
        self.main_thrust = main_thrust
        self.side_thrust = side_thrust
        self.side_torque = side_torque
        self.spawn_height = spawn_height
        self.episode_len = episode_len
        self.soft_speed = soft_speed
        self.soft_angle = soft_angle
        self.state: np.ndarray | None = None
        self.t = 0

    def reset(self, seed: int | None = None,
              rng: np.random.Generator | None = None) -> np.ndarray:
        if rng is None:
            rng = np.random.default_rng(seed)
        vx, vy = rng.uniform(-0.05, 0.05, size=2)
        self.state = np.array([0.0, self.spawn_height, vx, vy, 0.0, 0.0])
        self.t = 0
        return self.state.copy()

    def dynamics(self, state: np.ndarray, action: int) -> np.ndarray:
        if action not in (0, 1, 2, 3):
            raise ValueError(f"invalid lander action {action}")
        px, py, vx, vy, psi, psid = (float(v) for v in state)
        ax, ay, aa = 0.0, -self.gravity, 0.0
        if action == 2:  # main engine thrusts along the body axis
            ax += self.main_thrust * (-math.sin(psi))
            ay += self.main_thrust * math.cos(psi)
        elif action == 1:  # left thruster
            ax += self.side_thrust * math.cos(psi)
            ay += self.side_thrust * math.sin(psi)
            aa += self.side_torque
        elif action == 3:  # right thruster
            ax -= self.side_thrust * math.cos(psi)
            ay -= self.side_thrust * math.sin(psi)
            aa -= self.side_torque
        vx += self.dt * ax
        vy += self.dt * ay
        psid += self.dt * aa
        px += self.dt * vx
        py += self.dt * vy
        psi += self.dt * psid
        return np.array([px, py, vx, vy, psi, psid])

    def step(self, action: int) -> StepResult:
        if self.state is None:
            raise RuntimeError("reset() before step()")
        state = self.dynamics(self.state, action)
        self.t += 1
        terminated = state[1] <= 0.0
        truncated = (not terminated) and self.t >= self.episode_len
        reward = 0.0
        if terminated:
            speed = math.hypot(state[2], state[3])
            soft = speed < self.soft_speed and abs(state[4]) < self.soft_angle
            reward = 100.0 if soft else -100.0
        self.state = state
        if terminated or truncated:
            self.state = None
        return StepResult(state, reward, terminated, truncated)

    @staticmethod
    def label(state: np.ndarray) -> np.ndarray:
        return np.asarray(state, dtype=float)


ENV_KINDS = ("pendulum", "lander")


def make_env(kind: str, **overrides):
    if kind == "pendulum":
        return PendulumEnv(**overrides)
    if kind == "lander":
        return LanderEnv(**overrides)
    raise ValueError(f"unknown environment kind {kind!r}")
