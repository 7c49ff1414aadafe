"""Clipped-surrogate policy optimization with temporal-task reward shaping.

The training loop alternates rollout collection, shaped-reward computation,
generalized advantage estimation, and several epochs of minibatch updates
on the clipped objective (policy) and squared error (value net).  Shaping
uses a potential built from the robustness of predicted observation words;
two increment forms are supported:

- ``potential``:     F = gamma * Phi(x') - Phi(x)   (telescoping, argmax-safe)
- ``reverse``: F = kappa * Phi(x) - Phi(x')

Also houses behavior cloning, parameter degradation, and greedy evaluation.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .envs import make_env
from .nn import Adam, Mlp, ParamVector
from .policy import SoftmaxPolicy, tv_distance
from .seeding import substream
from .twtl.ast import SpecFile
from .twtl.semantics import ObservationWord, robustness, satisfies, time_horizon

__all__ = ["PpoConfig", "TransitionBatch", "TrainingDiverged",
           "shaping_increment", "potential_value", "compute_gae",
           "clipped_objective", "appo_train", "behavior_clone",
           "degrade_params", "degrade_policy", "evaluate", "EvalResult",
           "METRICS_COLUMNS"]

METRICS_COLUMNS = ("update", "steps", "mean_return", "mean_shaped_return",
                   "satisfaction_rate", "alpha", "policy_loss", "value_loss",
                   "entropy", "tv_distance", "robustness_mean")

SHAPING_FORMS = ("potential", "reverse")


class TrainingDiverged(RuntimeError):
    pass


@dataclass
class PpoConfig:
    clip: float = 0.2
    gamma: float = 0.99
    lam: float = 0.95
    kappa: float = 0.99
    epochs: int = 10
    minibatch: int = 64
    policy_lr: float = 3e-4
    value_lr: float = 1e-3
    rollout_steps: int = 2048
    total_steps: int = 100_000
    shaping_form: str = "potential"
    normalize_adv: bool = True
    entropy_coeff: float = 0.0
    value_coeff: float = 0.5
    rmax: float = 100.0

    def __post_init__(self):
        if not 0.0 < self.clip < 1.0:
            raise ValueError("clip must be in (0, 1)")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must be in (0, 1)")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("lam must be in [0, 1]")
        if not 0.0 < self.kappa < 1.0:
            raise ValueError("kappa must be in (0, 1)")
        if self.shaping_form not in SHAPING_FORMS:
            raise ValueError(f"shaping_form must be one of {SHAPING_FORMS}")
        if self.entropy_coeff < 0.0:
            raise ValueError("entropy_coeff must be >= 0")
        if self.epochs < 1 or self.minibatch < 1 or self.rollout_steps < 1:
            raise ValueError("epochs, minibatch, rollout_steps must be >= 1")
        if self.total_steps < 0:
            raise ValueError("total_steps must be >= 0")
        if self.rmax <= 0.0:
            raise ValueError("rmax must be > 0")


@dataclass
class TransitionBatch:
    states: np.ndarray        # (T, d)
    actions: np.ndarray       # (T,)
    log_probs: np.ndarray     # (T,)
    base_rewards: np.ndarray  # (T,)
    shaped: np.ndarray        # (T,) shaping increments F
    rewards: np.ndarray       # (T,) r' = r + F
    values: np.ndarray        # (T,)
    next_values: np.ndarray   # (T,) bootstrap, 0 where terminated
    episode_ends: np.ndarray  # (T,) bool
    advantages: np.ndarray = field(default=None)
    targets: np.ndarray = field(default=None)

    def __len__(self) -> int:
        return self.states.shape[0]


# --- shaping ----------------------------------------------------------------

def potential_value(recent_states, predictor, spec: SpecFile,
                    rmax: float) -> float:
    """Phi(x) = robustness of the predicted word, clamped to [-rmax, rmax]."""
    h = time_horizon(spec.formula)
    word = predictor.predict(recent_states, h)
    rob = robustness(word, spec.formula, spec)
    return float(np.clip(rob, -rmax, rmax))


def shaping_increment(x_t, x_next, predictor, spec: SpecFile, kappa: float,
                      gamma: float, form: str, rmax: float = 100.0) -> float:
    """Shaped-reward increment F for a single transition."""
    phi_t = potential_value(x_t, predictor, spec, rmax)
    phi_next = potential_value(x_next, predictor, spec, rmax)
    return _increment(phi_t, phi_next, kappa, gamma, form)


def _increment(phi_t: float, phi_next: float, kappa: float, gamma: float,
               form: str) -> float:
    if form == "potential":
        return gamma * phi_next - phi_t
    if form == "reverse":
        return kappa * phi_t - phi_next
    raise ValueError(f"unknown shaping form {form!r}")


# --- advantage estimation ---------------------------------------------------

def compute_gae(rewards, values, next_values, episode_ends, gamma, lam):
    """Advantages and return targets from TD residuals.

    delta_t = r_t + gamma * V(x_{t+1}) - V(x_t), accumulated backward with
    factor gamma*lam and reset at episode boundaries.  ``next_values`` must
    be 0 where the episode terminated and a bootstrap value where truncated.
    Returns (advantages, targets) with targets = advantages + values.
    """
    rewards = np.asarray(rewards, dtype=float)
    values = np.asarray(values, dtype=float)
    next_values = np.asarray(next_values, dtype=float)
    episode_ends = np.asarray(episode_ends, dtype=bool)
    if not rewards.shape == values.shape == next_values.shape \
            == episode_ends.shape:
        raise ValueError("all inputs must share one length")
    delta = rewards + gamma * next_values - values
    adv = np.empty_like(delta)
    acc = 0.0
    for t in range(len(delta) - 1, -1, -1):
        if episode_ends[t]:
            acc = 0.0
        acc = delta[t] + gamma * lam * acc
        adv[t] = acc
    return adv, adv + values


def clipped_objective(ratio, adv, eps):
    """Per-sample min(ratio * A, g(eps, A)) with the one-sided clip g."""
    ratio = np.asarray(ratio, dtype=float)
    adv = np.asarray(adv, dtype=float)
    g = np.where(adv >= 0.0, (1.0 + eps) * adv, (1.0 - eps) * adv)
    return np.minimum(ratio * adv, g)


# --- episode bookkeeping ----------------------------------------------------

def _episode_word(obs_list, horizon: int) -> ObservationWord:
    """Pad (repeat last) or truncate a raw episode to horizon + 1 steps."""
    obs = np.asarray(obs_list, dtype=float)
    if obs.shape[0] < horizon + 1:
        pad = np.repeat(obs[-1:], horizon + 1 - obs.shape[0], axis=0)
        obs = np.concatenate([obs, pad])
    return ObservationWord(obs[:horizon + 1])


class _RolloutWorker:
    """Owns the environment and episode state across rollout boundaries."""

    def __init__(self, env, spec, predictor, cfg, env_rng, history_len):
        self.env = env
        self.spec = spec
        self.predictor = predictor
        self.cfg = cfg
        self.env_rng = env_rng
        self.history_len = history_len
        self.horizon = time_horizon(spec.formula) if spec is not None else 0
        self._begin_episode()

    def _begin_episode(self):
        self.state = self.env.reset(rng=self.env_rng)
        self.obs = [self.state.copy()]
        self.base_return = 0.0
        self.shaped_return = 0.0
        self.phi = self._phi(self.obs)

    def _phi(self, obs_list):
        if self.predictor is None:
            return 0.0
        return potential_value(np.asarray(obs_list[-self.history_len:]),
                               self.predictor, self.spec, self.cfg.rmax)

    def collect(self, policy, value_net, rng, n_steps):
        """Run n_steps, returning a TransitionBatch plus episode stats."""
        cfg = self.cfg
        d = self.env.obs_dim
        states = np.empty((n_steps, d))
        next_states = np.empty((n_steps, d))
        actions = np.empty(n_steps, dtype=int)
        log_probs = np.empty(n_steps)
        base_rewards = np.empty(n_steps)
        shaped = np.empty(n_steps)
        terminated = np.zeros(n_steps, dtype=bool)
        ends = np.zeros(n_steps, dtype=bool)
        ep_returns, ep_shaped, ep_sat, ep_rob = [], [], [], []
        for t in range(n_steps):
            states[t] = self.state
            a, lp = policy.sample(self.state, rng)
            res = self.env.step(a)
            self.obs.append(res.next_state.copy())
            phi_next = self._phi(self.obs)
            F = _increment(self.phi, phi_next, cfg.kappa, cfg.gamma,
                           cfg.shaping_form) if self.predictor is not None else 0.0
            actions[t] = a
            log_probs[t] = lp
            base_rewards[t] = res.base_reward
            shaped[t] = F
            next_states[t] = res.next_state
            terminated[t] = res.terminated
            self.base_return += res.base_reward
            self.shaped_return += res.base_reward + F
            self.phi = phi_next
            self.state = res.next_state
            if res.terminated or res.truncated:
                ends[t] = True
                ep_returns.append(self.base_return)
                ep_shaped.append(self.shaped_return)
                if self.spec is not None:
                    word = _episode_word(self.obs, self.horizon)
                    ep_sat.append(float(satisfies(word, self.spec.formula,
                                                  self.spec)))
                    rob = robustness(word, self.spec.formula, self.spec)
                    ep_rob.append(float(np.clip(rob, -cfg.rmax, cfg.rmax)))
                self._begin_episode()
        ends[-1] = True  # rollout boundary cut: bootstrap, reset GAE
        values = _value_batch(value_net, states)
        next_vals = _value_batch(value_net, next_states)
        next_vals[terminated] = 0.0
        batch = TransitionBatch(states, actions, log_probs, base_rewards,
                                shaped, base_rewards + shaped, values,
                                next_vals, ends)
        return batch, {"returns": ep_returns, "shaped": ep_shaped,
                       "sat": ep_sat, "rob": ep_rob}


def _value_batch(value_net: Mlp, states: np.ndarray) -> np.ndarray:
    out, _ = value_net.forward(states)
    return out[:, 0].copy()


# --- training loop ----------------------------------------------------------

def _format_row(values) -> str:
    out = []
    for v in values:
        out.append(str(v) if isinstance(v, int) else repr(float(v)))
    return ",".join(out)


def appo_train(cfg: PpoConfig, env_kind: str, spec: SpecFile, policy,
               value_net: Mlp, predictor, seed: int, run_dir,
               env_overrides: dict | None = None) -> list[dict]:
    """Full training loop; returns the per-update metrics rows.

    ``policy`` is a SoftmaxPolicy or HybridPolicy; ``predictor`` enables
    reward shaping when not None.  Writes ``metrics.csv`` and final/best
    policy params into ``run_dir``.
    """
    from .policy import save_policy  # cycle-free local import

    os.makedirs(run_dir, exist_ok=True)
    env = make_env(env_kind, **(env_overrides or {}))
    env_rng = substream(seed, "env")
    rollout_rng = substream(seed, "rollout")
    worker = _RolloutWorker(env, spec, predictor, cfg, env_rng,
                            history_len=8)
    policy_opt = Adam(policy.trainable_params(), cfg.policy_lr)
    value_opt = Adam(value_net.params, cfg.value_lr)
    n_updates = math.ceil(cfg.total_steps / cfg.rollout_steps)
    metrics: list[dict] = []
    last_return = 0.0
    last_shaped = 0.0
    alpha_of = getattr(policy, "alpha", None)
    with open(os.path.join(run_dir, "metrics.csv"), "w") as fh:
        fh.write(",".join(METRICS_COLUMNS) + "\n")
        best_return = -math.inf
        for update in range(1, n_updates + 1):
            steps = min(cfg.rollout_steps,
                        cfg.total_steps - (update - 1) * cfg.rollout_steps)
            batch, stats = worker.collect(policy, value_net, rollout_rng, steps)
            adv, targets = compute_gae(batch.rewards, batch.values,
                                       batch.next_values, batch.episode_ends,
                                       cfg.gamma, cfg.lam)
            batch.targets = targets
            if cfg.normalize_adv and len(batch) > 1:
                adv = (adv - adv.mean()) / (adv.std() + 1e-8)
            batch.advantages = adv
            probs_before = policy.action_probs(batch.states[:256])
            stats_losses = _update_params(cfg, policy, value_net, policy_opt,
                                          value_opt, batch, rollout_rng)
            probs_after = policy.action_probs(batch.states[:256])
            tv = float(np.max(0.5 * np.sum(np.abs(probs_after - probs_before),
                                           axis=-1)))
            if stats["returns"]:
                last_return = float(np.mean(stats["returns"]))
                last_shaped = float(np.mean(stats["shaped"]))
            sat = float(np.mean(stats["sat"])) if stats["sat"] else 0.0
            rob = float(np.mean(stats["rob"])) if stats["rob"] else 0.0
            alpha = float(policy.alpha) if alpha_of is not None else 1.0
            row = {"update": update, "steps": update * cfg.rollout_steps
                   if steps == cfg.rollout_steps else cfg.total_steps,
                   "mean_return": last_return,
                   "mean_shaped_return": last_shaped,
                   "satisfaction_rate": sat, "alpha": alpha,
                   "policy_loss": stats_losses["policy_loss"],
                   "value_loss": stats_losses["value_loss"],
                   "entropy": stats_losses["entropy"], "tv_distance": tv,
                   "robustness_mean": rob}
            fh.write(_format_row(row[c] for c in METRICS_COLUMNS) + "\n")
            metrics.append(row)
            if last_return >= best_return:
                best_return = last_return
                save_policy(os.path.join(run_dir, "policy_best.params"), policy)
    save_policy(os.path.join(run_dir, "policy_final.params"), policy)
    return metrics


def _update_params(cfg, policy, value_net, policy_opt, value_opt, batch, rng):
    """K epochs of minibatch ascent; returns mean loss diagnostics."""
    T = len(batch)
    pol_losses, val_losses, entropies = [], [], []
    for _ in range(cfg.epochs):
        order = rng.permutation(T)
        for start in range(0, T, cfg.minibatch):
            idx = order[start:start + cfg.minibatch]
            m = len(idx)
            states = batch.states[idx]
            acts = batch.actions[idx]
            adv = batch.advantages[idx]
            # forward pass for ratios
            probs = policy.action_probs(states)
            lp_new = np.log(probs[np.arange(m), acts])
            ratio = np.exp(lp_new - batch.log_probs[idx])
            obj = clipped_objective(ratio, adv, cfg.clip)
            active = ratio * adv <= np.where(adv >= 0.0,
                                             (1.0 + cfg.clip) * adv,
                                             (1.0 - cfg.clip) * adv)
            coeffs = np.where(active, ratio * adv, 0.0) / m
            grads, probs2 = policy.grad_weighted_logprob(
                states, acts, coeffs, ent_coeff=cfg.entropy_coeff / m)
            ent = float(np.mean(-np.sum(probs2 * np.log(probs2 + 1e-12),
                                        axis=-1)))
            neg = grads.zeros_like()
            neg.add_(grads, -1.0)  # Adam descends; we ascend the objective
            policy_opt.step(neg)
            # value regression
            v_out, v_cache = value_net.forward(states)
            err = v_out[:, 0] - batch.targets[idx]
            v_loss = cfg.value_coeff * float(np.mean(err ** 2))
            dv = (cfg.value_coeff * 2.0 * err / m).reshape(-1, 1)
            v_grads, _ = value_net.backward(v_cache, dv)
            value_opt.step(v_grads)
            pol_loss = -float(np.mean(obj))
            if not (math.isfinite(pol_loss) and math.isfinite(v_loss)):
                raise TrainingDiverged(
                    f"non-finite loss: policy {pol_loss}, value {v_loss}")
            pol_losses.append(pol_loss)
            val_losses.append(v_loss)
            entropies.append(ent)
    return {"policy_loss": float(np.mean(pol_losses)),
            "value_loss": float(np.mean(val_losses)),
            "entropy": float(np.mean(entropies))}


# --- behavior cloning, degradation, evaluation ------------------------------

def behavior_clone(demos, n_actions: int, epochs: int, lr: float, seed: int,
                   hidden: tuple[int, ...] = (32, 32), batch_size: int = 64
                   ) -> tuple[SoftmaxPolicy, list[float]]:
    """Max-likelihood fit of a softmax policy to demo state/action pairs."""
    pairs_s, pairs_a = [], []
    for tr in demos.trajectories:
        pairs_s.append(tr.states[:-1])
        pairs_a.append(tr.actions)
    if not pairs_s:
        raise ValueError("empty demonstration set")
    X = np.concatenate(pairs_s)
    A = np.concatenate(pairs_a)
    if np.any(A < 0) or np.any(A >= n_actions):
        raise ValueError("demo action index out of range")
    rng = substream(seed, "policy-init")
    order_rng = substream(seed, "bc-order")
    policy = SoftmaxPolicy.init(X.shape[1], list(hidden), n_actions, rng)
    opt = Adam(policy.net.params, lr)
    losses: list[float] = []
    n = X.shape[0]
    for _ in range(epochs):
        order = order_rng.permutation(n)
        total = 0.0
        for start in range(0, n, batch_size):
            idx = order[start:start + batch_size]
            m = len(idx)
            grads, probs = policy.grad_weighted_logprob(
                X[idx], A[idx], np.full(m, 1.0 / m))
            total -= float(np.sum(np.log(probs[np.arange(m), A[idx]])))
            neg = grads.zeros_like()
            neg.add_(grads, -1.0)
            opt.step(neg)
        losses.append(total / n)
    return policy, losses


def degrade_params(params: ParamVector, sigma: float,
                   rng: np.random.Generator) -> ParamVector:
    if sigma < 0.0:
        raise ValueError("sigma must be >= 0")
    return ParamVector({k: v + sigma * rng.standard_normal(v.shape)
                        for k, v in params.items()})


def degrade_policy(policy: SoftmaxPolicy, sigma: float,
                   seed: int) -> SoftmaxPolicy:
    """Gaussian-perturb every weight; deterministic per seed."""
    rng = substream(seed, "degradation")
    net = Mlp(policy.net.sizes, policy.net.head,
              degrade_params(policy.net.params, sigma, rng))
    return SoftmaxPolicy(net)


@dataclass(frozen=True)
class EvalResult:
    mean_return: float
    std_return: float
    satisfaction_rate: float
    returns: tuple[float, ...]


def evaluate(policy, env_kind: str, episodes: int, seed: int,
             spec: SpecFile | None = None,
             env_overrides: dict | None = None) -> EvalResult:
    """Greedy (argmax) evaluation; returns base-reward and satisfaction stats."""
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    env = make_env(env_kind, **(env_overrides or {}))
    rng = substream(seed, "eval")
    horizon = time_horizon(spec.formula) if spec is not None else 0
    returns, sats = [], []
    for _ in range(episodes):
        s = env.reset(rng=rng)
        obs = [s.copy()]
        total = 0.0
        while True:
            res = env.step(policy.greedy(s))
            s = res.next_state
            obs.append(s.copy())
            total += res.base_reward
            if res.terminated or res.truncated:
                break
        returns.append(total)
        if spec is not None:
            word = _episode_word(obs, horizon)
            sats.append(float(satisfies(word, spec.formula, spec)))
    arr = np.asarray(returns)
    return EvalResult(float(arr.mean()), float(arr.std()),
                      float(np.mean(sats)) if sats else 0.0,
                      tuple(returns))
