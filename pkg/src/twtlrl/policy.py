"""Discrete-action policies: plain softmax and the offline/online hybrid.

The hybrid policy mixes a frozen offline branch with a trainable online
branch through a learned scalar gate:

    pi(u|x) = (1 - alpha) * pi_off(u|x) + alpha * pi_on(u|x),
    alpha = logistic(mix_raw).

Gradients flow into the online branch and ``mix_raw`` only; the offline
branch is never updated.
"""

from __future__ import annotations

import math

import numpy as np

from .nn import Mlp, ParamVector, load_params, save_params

__all__ = ["SoftmaxPolicy", "HybridPolicy", "tv_distance",
           "save_policy", "load_policy", "DEFAULT_ALPHA0"]

DEFAULT_ALPHA0 = 0.1


def _sigmoid(x: float) -> float:
    return 1.0 / (1.0 + math.exp(-x))


def _sample_index(probs: np.ndarray, rng: np.random.Generator) -> int:
    u = rng.random()
    idx = int(np.searchsorted(np.cumsum(probs), u))
    return min(idx, probs.shape[-1] - 1)


def _softmax_vjp(probs: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Jacobian-vector product of softmax: d(loss)/d(logits) from d/d(probs)."""
    inner = np.sum(g * probs, axis=-1, keepdims=True)
    return probs * (g - inner)


class SoftmaxPolicy:
    """Feed-forward softmax policy over a discrete action set."""

    def __init__(self, net: Mlp):
        if net.head != "softmax":
            raise ValueError("policy net must have a softmax head")
        self.net = net

    @classmethod
    def init(cls, obs_dim: int, hidden: list[int], n_actions: int,
             rng: np.random.Generator) -> "SoftmaxPolicy":
        return cls(Mlp.init([obs_dim, *hidden, n_actions], "softmax", rng))

    @property
    def n_actions(self) -> int:
        return self.net.sizes[-1]

    def action_probs(self, x: np.ndarray) -> np.ndarray:
        probs, _ = self.net.forward(x)
        return probs

    def sample(self, x: np.ndarray, rng: np.random.Generator) -> tuple[int, float]:
        probs = self.action_probs(x)
        a = _sample_index(probs, rng)
        return a, float(np.log(probs[a]))

    def greedy(self, x: np.ndarray) -> int:
        return int(np.argmax(self.action_probs(x)))

    def trainable_params(self) -> ParamVector:
        return self.net.params

    def grad_weighted_logprob(self, states: np.ndarray, actions: np.ndarray,
                              coeffs: np.ndarray, ent_coeff: float = 0.0
                              ) -> tuple[ParamVector, np.ndarray]:
        """Gradient of sum_i c_i * log pi(u_i|x_i) (+ entropy bonus).

        Returns (parameter gradients, action probabilities per row).
        """
        probs, cache = self.net.forward(np.asarray(states, dtype=float))
        B = probs.shape[0]
        rows = np.arange(B)
        g = np.zeros_like(probs)
        g[rows, actions] = coeffs / probs[rows, actions]
        if ent_coeff != 0.0:
            g += ent_coeff * (-(np.log(probs) + 1.0))
        dlogits = _softmax_vjp(probs, g)
        grads, _ = self.net.backward(cache, dlogits)
        return grads, probs

    def log_prob_grad(self, x: np.ndarray, action: int
                      ) -> tuple[float, ParamVector]:
        probs = self.action_probs(x)
        grads, _ = self.grad_weighted_logprob(
            np.asarray(x, dtype=float).reshape(1, -1),
            np.array([action]), np.ones(1))
        return float(np.log(probs[action])), grads


class HybridPolicy:
    """Convex mixture of a frozen offline branch and a trainable online one."""

    def __init__(self, offline: Mlp, online: Mlp, mix_raw: float):
        if offline.sizes[0] != online.sizes[0] \
                or offline.sizes[-1] != online.sizes[-1]:
            raise ValueError("offline/online nets must share in/out dimensions")
        self.offline = offline
        self.online = online
        self.mix_raw = np.asarray(float(mix_raw), dtype=float)  # 0-d, shared

    @classmethod
    def init(cls, offline: Mlp, hidden: list[int], rng: np.random.Generator,
             alpha0: float = DEFAULT_ALPHA0) -> "HybridPolicy":
        obs_dim, n_actions = offline.sizes[0], offline.sizes[-1]
        online = Mlp.init([obs_dim, *hidden, n_actions], "softmax", rng)
        mix_raw = math.log(alpha0 / (1.0 - alpha0))
        return cls(offline, online, mix_raw)

    @property
    def n_actions(self) -> int:
        return self.online.sizes[-1]

    @property
    def alpha(self) -> float:
        return _sigmoid(float(self.mix_raw))

    def action_probs(self, x: np.ndarray) -> np.ndarray:
        p_off, _ = self.offline.forward(x)
        p_on, _ = self.online.forward(x)
        a = self.alpha
        return (1.0 - a) * p_off + a * p_on

    def sample(self, x: np.ndarray, rng: np.random.Generator) -> tuple[int, float]:
        probs = self.action_probs(x)
        a = _sample_index(probs, rng)
        return a, float(np.log(probs[a]))

    def greedy(self, x: np.ndarray) -> int:
        return int(np.argmax(self.action_probs(x)))

    def trainable_params(self) -> ParamVector:
        segs = dict(self.online.params.segments)
        segs["mix_raw"] = self.mix_raw
        return ParamVector(segs)

    def grad_weighted_logprob(self, states: np.ndarray, actions: np.ndarray,
                              coeffs: np.ndarray, ent_coeff: float = 0.0
                              ) -> tuple[ParamVector, np.ndarray]:
        """Gradient of sum_i c_i * log pi(u_i|x_i) (+ entropy bonus).

        Returns gradients keyed like ``trainable_params`` (online weights
        plus ``mix_raw``) and the mixed action probabilities per row.
        """
        states = np.asarray(states, dtype=float)
        p_off, _ = self.offline.forward(states)
        p_on, cache = self.online.forward(states)
        a = self.alpha
        probs = (1.0 - a) * p_off + a * p_on
        B = probs.shape[0]
        rows = np.arange(B)
        # d(loss)/d(mixed probs)
        g = np.zeros_like(probs)
        g[rows, actions] = coeffs / probs[rows, actions]
        if ent_coeff != 0.0:
            g += ent_coeff * (-(np.log(probs) + 1.0))
        dmix = float(np.sum(g * (p_on - p_off)) * a * (1.0 - a))
        dlogits = a * _softmax_vjp(p_on, g)
        grads, _ = self.online.backward(cache, dlogits)
        segs = dict(grads.segments)
        segs["mix_raw"] = np.asarray(dmix, dtype=float)
        return ParamVector(segs), probs

    def log_prob_grad(self, x: np.ndarray, action: int
                      ) -> tuple[float, ParamVector]:
        """Log-probability and its gradient w.r.t. the trainable parameters."""
        probs = self.action_probs(x)
        grads, _ = self.grad_weighted_logprob(
            np.asarray(x, dtype=float).reshape(1, -1),
            np.array([action]), np.ones(1))
        return float(np.log(probs[action])), grads


def tv_distance(policy1, policy2, states: np.ndarray) -> float:
    """Max over sampled states of half the L1 action-distribution gap."""
    states = np.asarray(states, dtype=float)
    if states.ndim == 1:
        states = states.reshape(1, -1)
    if states.shape[0] == 0:
        raise ValueError("tv_distance needs a nonempty state sample")
    p1 = policy1.action_probs(states)
    p2 = policy2.action_probs(states)
    return float(np.max(0.5 * np.sum(np.abs(p1 - p2), axis=-1)))


# --- persistence ------------------------------------------------------------

def _net_segments(prefix: str, net: Mlp) -> dict[str, np.ndarray]:
    return {f"{prefix}.{k}": v for k, v in net.params.items()}


def _net_from_segments(prefix: str, segs: dict[str, np.ndarray],
                       head: str) -> Mlp:
    own = {k[len(prefix) + 1:]: v for k, v in segs.items()
           if k.startswith(prefix + ".")}
    n_layers = sum(1 for k in own if k.startswith("W"))
    if n_layers == 0:
        raise ValueError(f"no {prefix!r} segments in params file")
    sizes = [own["W0"].shape[0]]
    sizes += [own[f"W{i}"].shape[1] for i in range(n_layers)]
    return Mlp(sizes, head, ParamVector(own))


def save_policy(path, policy) -> None:
    if isinstance(policy, SoftmaxPolicy):
        save_params(path, "softmax-policy",
                    ParamVector(_net_segments("net", policy.net)))
    elif isinstance(policy, HybridPolicy):
        segs = _net_segments("offline", policy.offline)
        segs.update(_net_segments("online", policy.online))
        segs["mix_raw"] = policy.mix_raw
        save_params(path, "hybrid-policy", ParamVector(segs))
    else:
        raise TypeError(f"cannot persist {type(policy).__name__}")


def load_policy(path):
    kind, params = load_params(path)
    segs = params.segments
    if kind == "softmax-policy":
        return SoftmaxPolicy(_net_from_segments("net", segs, "softmax"))
    if kind == "hybrid-policy":
        return HybridPolicy(_net_from_segments("offline", segs, "softmax"),
                            _net_from_segments("online", segs, "softmax"),
                            float(segs["mix_raw"]))
    raise ValueError(f"{path}: unknown policy kind {kind!r}")
