"""Scripted expert controllers used to generate demonstration data.

The pendulum expert is a discretized PD stabilizer; the lander expert is a
proportional-derivative descent controller that tracks a phased altitude
profile (hover, then constant-rate descent, then a slow final approach)
while regulating angle and lateral drift through thrust tilt.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["pendulum_expert", "lander_expert", "random_controller",
           "make_controller"]


def pendulum_expert(state: np.ndarray, t: int) -> int:
    theta, theta_dot = float(state[0]), float(state[1])
    u = -20.0 * theta - 6.0 * theta_dot
    if u > 1.0:
        return 2
    if u < -1.0:
        return 0
    return 1


def _lander_altitude_ref(t: int, dt: float) -> tuple[float, float]:
    """Reference (altitude, vertical rate) at step t of the descent profile."""
    hover_y = 1.12
    hover_until = 4.0       # seconds spent hovering
    descend_rate = -0.10    # m/s during main descent
    final_y = 0.3           # switch to final approach below this altitude
    final_rate = -0.05
    tt = t * dt
    if tt <= hover_until:
        return hover_y, 0.0
    y = hover_y + descend_rate * (tt - hover_until)
    if y > final_y:
        return y, descend_rate
    t_final = tt - hover_until - (hover_y - final_y) / (-descend_rate)
    return max(final_y + final_rate * t_final, -0.3), final_rate


def lander_expert(state: np.ndarray, t: int, dt: float = 0.05) -> int:
    px, py, vx, vy, psi, psid = (float(v) for v in state)
    y_ref, vy_ref = _lander_altitude_ref(t, dt)
    vert_cmd = 6.0 * (y_ref - py) + 6.0 * (vy_ref - vy)

    if py <= 0.08:
        # Touchdown: attitude frozen, throttle the crawl to the ground.
        return 2 if vert_cmd > 0 else 0
    if py <= 0.5:
        # Quiesce: tight attitude loop with a small drift-killing tilt.
        psi_ref = float(np.clip(3.0 * vx, -0.04, 0.04))
        ang_cmd = 9.0 * (psi_ref - psi) - 8.0 * psid
        deadband = 0.1
    else:
        # Cruise: tilt toward the pad from lateral position/velocity error.
        psi_ref = float(np.clip(0.5 * px + 1.4 * vx, -0.08, 0.08))
        ang_cmd = 9.0 * (psi_ref - psi) - 4.0 * psid
        deadband = 0.4

    if vert_cmd > 1.0:  # losing altitude fast, thrust beats attitude
        return 2
    if abs(ang_cmd) > deadband:
        return 1 if ang_cmd > 0 else 3
    if vert_cmd > 0.0:
        return 2
    return 0


def random_controller(n_actions: int, rng: np.random.Generator):
    def act(state: np.ndarray, t: int) -> int:
        return int(rng.integers(n_actions))
    return act


def make_controller(env_kind: str, name: str, rng: np.random.Generator):
    """Controller factory: name in {'expert', 'random'}."""
    if name == "random":
        n_actions = 3 if env_kind == "pendulum" else 4
        return random_controller(n_actions, rng)
    if name != "expert":
        raise ValueError(f"unknown controller {name!r}")
    if env_kind == "pendulum":
        return pendulum_expert
    if env_kind == "lander":
        return lander_expert
    raise ValueError(f"unknown environment kind {env_kind!r}")
