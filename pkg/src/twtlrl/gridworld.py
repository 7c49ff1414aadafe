"""Tabular MDP machinery certifying that potential shaping preserves optima.

Exact value iteration on a small slippery gridworld is the oracle: for any
finite potential Phi, the MDP reshaped with r' = r + gamma*Phi(s') - Phi(s)
must have identical greedy argmax sets, and optimal values shifted by
exactly -Phi.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["TabularMdp", "make_gridworld", "value_iteration",
           "shaped_mdp", "verify_shaping"]


@dataclass(frozen=True)
class TabularMdp:
    transitions: np.ndarray  # (S, A, S), row-stochastic in the last axis
    rewards: np.ndarray      # (S, A, S)
    gamma: float

    def __post_init__(self):
        P = np.asarray(self.transitions, dtype=float)
        R = np.asarray(self.rewards, dtype=float)
        if P.ndim != 3 or P.shape[0] != P.shape[2] or R.shape != P.shape:
            raise ValueError("transitions must be (S, A, S) with matching rewards")
        if not np.allclose(P.sum(axis=2), 1.0, atol=1e-12):
            raise ValueError("transition rows must sum to 1")
        if not np.all(np.isfinite(R)):
            raise ValueError("rewards must be finite")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must be in [0, 1)")
        object.__setattr__(self, "transitions", P)
        object.__setattr__(self, "rewards", R)

    @property
    def n_states(self) -> int:
        return self.transitions.shape[0]

    @property
    def n_actions(self) -> int:
        return self.transitions.shape[1]


def make_gridworld(size: int = 5, slip: float = 0.1, gamma: float = 0.95,
                   goal_reward: float = 1.0) -> TabularMdp:
    """Slippery gridworld: 4 moves, perpendicular slip, absorbing goal corner.

    Reaching the goal cell pays ``goal_reward`` once; the goal is absorbing
    with zero further reward (no episode termination, so discounted values
    are everywhere well-defined).
    """
    S = size * size
    A = 4  # up, down, left, right
    moves = [(-1, 0), (1, 0), (0, -1), (0, 1)]
    perp = {0: (2, 3), 1: (2, 3), 2: (0, 1), 3: (0, 1)}
    goal = S - 1
    P = np.zeros((S, A, S))
    R = np.zeros((S, A, S))

    def clamp_dest(r, c, dr, dc):
        nr, nc = min(max(r + dr, 0), size - 1), min(max(c + dc, 0), size - 1)
        return nr * size + nc

    for s in range(S):
        if s == goal:
            P[s, :, s] = 1.0
            continue
        r, c = divmod(s, size)
        for a in range(A):
            outcomes = [(1.0 - slip, moves[a])]
            outcomes += [(slip / 2.0, moves[p]) for p in perp[a]]
            for prob, (dr, dc) in outcomes:
                dest = clamp_dest(r, c, dr, dc)
                P[s, a, dest] += prob
                if dest == goal:
                    R[s, a, dest] = goal_reward
    return TabularMdp(P, R, gamma)


def value_iteration(mdp: TabularMdp, tol: float = 1e-10,
                    tie_tol: float = 1e-9
                    ) -> tuple[np.ndarray, list[frozenset[int]]]:
    """Optimal values and per-state greedy argmax sets (ties within tie_tol)."""
    P, R = mdp.transitions, mdp.rewards
    V = np.zeros(mdp.n_states)
    # effective horizon bound on the sup-norm contraction
    while True:
        Q = np.einsum("sat,sat->sa", P, R + mdp.gamma * V[None, None, :])
        V_new = Q.max(axis=1)
        if np.max(np.abs(V_new - V)) <= tol * (1.0 - mdp.gamma):
            V = V_new
            break
        V = V_new
    Q = np.einsum("sat,sat->sa", P, R + mdp.gamma * V[None, None, :])
    greedy = [frozenset(np.flatnonzero(Q[s] >= Q[s].max() - tie_tol))
              for s in range(mdp.n_states)]
    return V, greedy


def shaped_mdp(mdp: TabularMdp, phi: np.ndarray, form: str = "potential",
               kappa: float = 0.99) -> TabularMdp:
    """Reshape rewards with the chosen increment form.

    ``potential``: r' = r + gamma*Phi(s') - Phi(s) (argmax-preserving);
    ``reverse``: r' = r + kappa*Phi(s) - Phi(s') (no such guarantee,
    exercised to record its behavior).
    """
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (mdp.n_states,) or not np.all(np.isfinite(phi)):
        raise ValueError("phi must be a finite vector over states")
    if form == "potential":
        F = mdp.gamma * phi[None, None, :] - phi[:, None, None]
    elif form == "reverse":
        F = kappa * phi[:, None, None] - phi[None, None, :]
    else:
        raise ValueError(f"unknown shaping form {form!r}")
    return TabularMdp(mdp.transitions, mdp.rewards + F, mdp.gamma)


def verify_shaping(mdp: TabularMdp, phi: np.ndarray, tol: float = 1e-10,
                   form: str = "potential", kappa: float = 0.99
                   ) -> tuple[bool, dict]:
    """Check that potential shaping leaves greedy argmax sets unchanged.

    Returns (ok, report); the report carries both value tables, the maximum
    deviation of the value shift from -Phi, and any argmax mismatches.
    """
    V0, g0 = value_iteration(mdp, tol)
    V1, g1 = value_iteration(shaped_mdp(mdp, phi, form, kappa), tol)
    mismatches = [s for s in range(mdp.n_states) if g0[s] != g1[s]]
    phi = np.asarray(phi, dtype=float)
    shift_err = float(np.max(np.abs((V1 - V0) + phi)))
    return not mismatches, {"values": V0, "shaped_values": V1,
                            "mismatches": mismatches,
                            "value_shift_error": shift_err,
                            "argmax": g0, "shaped_argmax": g1}
