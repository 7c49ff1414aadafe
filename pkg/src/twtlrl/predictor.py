"""Observation-sequence predictors used to evaluate temporal tasks mid-episode.

Two interchangeable implementations of "predict the next H observations
from recent state history":

- ``RolloutPredictor`` steps the true environment dynamics under a frozen
  controller; exact for deterministic dynamics and used as a baseline/oracle.
- ``LearnedPredictor`` is a recurrent encoder/decoder: a gated recurrent
  encoder reads a window of w recent states, and a decoder free-runs from
  the encoder state, feeding each predicted state back as its next input.
  Training is teacher-forced squared-error regression on demonstration
  windows.

Demonstration data round-trips through a flat CSV with header
``episode,t,x0..x{d-1},action,reward``; the final row of each episode
carries the terminal state with action -1 and reward 0.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .nn import Adam, GruCell, Mlp, ParamVector, load_params, save_params, \
    unroll, unroll_backward
from .seeding import substream
from .twtl.semantics import ObservationWord

__all__ = ["Trajectory", "DemonstrationSet", "RolloutPredictor",
           "LearnedPredictor", "train_predictor", "save_demos", "load_demos",
           "save_predictor", "load_predictor"]


@dataclass(frozen=True)
class Trajectory:
    states: np.ndarray   # (T+1, obs_dim)
    actions: np.ndarray  # (T,)
    rewards: np.ndarray  # (T,)

    def __post_init__(self):
        states = np.asarray(self.states, dtype=float)
        actions = np.asarray(self.actions, dtype=int)
        rewards = np.asarray(self.rewards, dtype=float)
        if states.ndim != 2 or states.shape[0] < 2:
            raise ValueError("trajectory needs at least two states")
        if actions.shape[0] != states.shape[0] - 1 \
                or rewards.shape[0] != actions.shape[0]:
            raise ValueError("states/actions/rewards lengths are inconsistent")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "actions", actions)
        object.__setattr__(self, "rewards", rewards)

    def __len__(self) -> int:
        return self.states.shape[0]


@dataclass(frozen=True)
class DemonstrationSet:
    trajectories: tuple[Trajectory, ...]

    def __post_init__(self):
        trajs = tuple(self.trajectories)
        if trajs:
            d = trajs[0].states.shape[1]
            for tr in trajs:
                if tr.states.shape[1] != d:
                    raise ValueError("mixed observation dimensions in demos")
        object.__setattr__(self, "trajectories", trajs)

    @property
    def obs_dim(self) -> int:
        if not self.trajectories:
            raise ValueError("empty demonstration set has no dimension")
        return self.trajectories[0].states.shape[1]

    def __len__(self) -> int:
        return len(self.trajectories)


def save_demos(path, demos: DemonstrationSet) -> None:
    d = demos.obs_dim
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["episode", "t"] + [f"x{i}" for i in range(d)]
                   + ["action", "reward"])
        for ep, tr in enumerate(demos.trajectories):
            for t, state in enumerate(tr.states):
                last = t == len(tr) - 1
                w.writerow([ep, t] + [repr(float(v)) for v in state]
                           + ([-1, 0.0] if last
                              else [int(tr.actions[t]), repr(float(tr.rewards[t]))]))


def load_demos(path) -> DemonstrationSet:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][:2] != ["episode", "t"]:
        raise ValueError(f"{path}: not a demonstration CSV")
    d = len(rows[0]) - 4
    episodes: dict[int, list[tuple[np.ndarray, int, float]]] = {}
    for row in rows[1:]:
        if not row:
            continue
        ep = int(row[0])
        state = np.array([float(v) for v in row[2:2 + d]])
        episodes.setdefault(ep, []).append(
            (state, int(row[2 + d]), float(row[3 + d])))
    trajs = []
    for ep in sorted(episodes):
        steps = episodes[ep]
        states = np.array([s for s, _, _ in steps])
        trajs.append(Trajectory(states,
                                np.array([a for _, a, _ in steps[:-1]]),
                                np.array([r for _, _, r in steps[:-1]])))
    return DemonstrationSet(tuple(trajs))


class RolloutPredictor:
    """Predicts by stepping the environment dynamics under a frozen policy.

    ``policy`` may be None (a constant no-op action) or anything with a
    ``greedy(state)`` method; it is only read, never trained.
    """

    def __init__(self, env, policy=None, noop_action: int = 0):
        self.env = env
        self.policy = policy
        self.noop_action = noop_action

    def predict(self, recent_states: np.ndarray, horizon: int) -> ObservationWord:
        states = np.asarray(recent_states, dtype=float)
        if states.ndim == 1:
            states = states.reshape(1, -1)
        if states.shape[0] < 1:
            raise ValueError("need at least one recent state")
        if states.shape[1] != self.env.obs_dim:
            raise ValueError(
                f"state dim {states.shape[1]} != env obs_dim {self.env.obs_dim}")
        x = states[-1]
        out = np.empty((horizon + 1, states.shape[1]))
        out[0] = self.env.label(x)
        for k in range(1, horizon + 1):
            a = self.noop_action if self.policy is None else self.policy.greedy(x)
            x = self.env.dynamics(x, a)
            out[k] = self.env.label(x)
        return ObservationWord(out)


class LearnedPredictor:
    """Recurrent encoder/decoder over raw observation vectors."""

    def __init__(self, encoder: GruCell, decoder: GruCell, head: Mlp,
                 window: int):
        if window < 1:
            raise ValueError("window must be >= 1")
        self.encoder = encoder
        self.decoder = decoder
        self.head = head
        self.window = window

    @classmethod
    def init(cls, obs_dim: int, window: int, hidden: int,
             rng: np.random.Generator) -> "LearnedPredictor":
        return cls(GruCell.init(obs_dim, hidden, rng),
                   GruCell.init(obs_dim, hidden, rng),
                   Mlp.init([hidden, obs_dim], "linear", rng),
                   window)

    @property
    def obs_dim(self) -> int:
        return self.encoder.input_size

    def _context(self, recent_states: np.ndarray) -> np.ndarray:
        """Front-pad history to exactly ``window`` states, newest last."""
        states = np.asarray(recent_states, dtype=float)
        if states.ndim == 1:
            states = states.reshape(1, -1)
        if states.shape[0] < 1:
            raise ValueError("need at least one recent state")
        if states.shape[1] != self.obs_dim:
            raise ValueError(
                f"state dim {states.shape[1]} != predictor dim {self.obs_dim}")
        states = states[-self.window:]
        if states.shape[0] < self.window:
            pad = np.repeat(states[:1], self.window - states.shape[0], axis=0)
            states = np.concatenate([pad, states])
        return states

    def predict(self, recent_states: np.ndarray, horizon: int) -> ObservationWord:
        ctx = self._context(recent_states)
        hs, _ = unroll(self.encoder, ctx[:, None, :])
        h = hs[-1]
        out = np.empty((horizon + 1, self.obs_dim))
        out[0] = ctx[-1]
        x = out[0].reshape(1, -1)
        for k in range(1, horizon + 1):
            h, _ = self.decoder.step(x, h)
            y, _ = self.head.forward(h)
            out[k] = y[0]
            x = y
        return ObservationWord(out)

    def forced_loss_and_grads(self, contexts: np.ndarray, targets: np.ndarray
                              ) -> tuple[float, ParamVector]:
        """Teacher-forced squared-error loss over a (B, w/H, d) window batch.

        ``contexts``: (B, w, d) encoder inputs; ``targets``: (B, H, d) future
        states.  The decoder consumes the true previous state at each step.
        Returns the summed loss and gradients keyed enc.*/dec.*/head.*.
        """
        contexts = np.asarray(contexts, dtype=float)
        targets = np.asarray(targets, dtype=float)
        B, w, d = contexts.shape
        H = targets.shape[1]
        enc_xs = np.transpose(contexts, (1, 0, 2))            # (w, B, d)
        enc_hs, enc_caches = unroll(self.encoder, enc_xs)
        # decoder inputs: current state then the true future, shifted by one
        dec_in = np.concatenate(
            [contexts[:, -1:, :], targets[:, :-1, :]], axis=1)
        dec_xs = np.transpose(dec_in, (1, 0, 2))              # (H, B, d)
        dec_hs, dec_caches = unroll(self.decoder, dec_xs, enc_hs[-1])
        preds = np.empty((H, B, d))
        head_caches = []
        for t in range(H):
            preds[t], cache = self.head.forward(dec_hs[t])
            head_caches.append(cache)
        err = preds - np.transpose(targets, (1, 0, 2))
        loss = float(np.sum(err ** 2))
        head_grads = self.head.params.zeros_like()
        dhs = np.empty_like(dec_hs)
        for t in range(H):
            g, dh = self.head.backward(head_caches[t], 2.0 * err[t])
            head_grads.add_(g)
            dhs[t] = dh
        dec_grads, _, dh0 = unroll_backward(self.decoder, dec_caches, dhs)
        enc_dhs = np.zeros_like(enc_hs)
        enc_dhs[-1] = dh0
        enc_grads, _, _ = unroll_backward(self.encoder, enc_caches, enc_dhs)
        segs = {f"enc.{k}": v for k, v in enc_grads.items()}
        segs.update({f"dec.{k}": v for k, v in dec_grads.items()})
        segs.update({f"head.{k}": v for k, v in head_grads.items()})
        return loss, ParamVector(segs)

    def trainable_params(self) -> ParamVector:
        segs = {f"enc.{k}": v for k, v in self.encoder.params.items()}
        segs.update({f"dec.{k}": v for k, v in self.decoder.params.items()})
        segs.update({f"head.{k}": v for k, v in self.head.params.items()})
        return ParamVector(segs)


def _windows(demos: DemonstrationSet, window: int, horizon: int,
             stride: int = 1
             ) -> tuple[list[tuple[np.ndarray, np.ndarray]], int]:
    """All (context, target) training windows, plus skipped-trajectory count."""
    need = window + horizon + 1
    out = []
    skipped = 0
    for tr in demos.trajectories:
        if len(tr) < need:
            skipped += 1
            continue
        for i in range(0, len(tr) - need + 1, stride):
            ctx = tr.states[i:i + window]
            tgt = tr.states[i + window:i + window + horizon]
            out.append((ctx, tgt))
    return out, skipped


def train_predictor(demos: DemonstrationSet, horizon: int, window: int,
                    epochs: int, lr: float, seed: int, hidden: int = 32,
                    batch_size: int = 16, stride: int = 1
                    ) -> tuple[LearnedPredictor, list[float], int]:
    """Fit a LearnedPredictor by teacher-forced regression.

    ``stride`` thins the training windows for speed on long trajectories.
    Returns (predictor, per-epoch mean losses, skipped trajectory count).
    """
    windows, skipped = _windows(demos, window, horizon, stride)
    if not windows:
        raise ValueError("no trajectory is long enough to train on")
    rng = substream(seed, "predictor-init")
    order_rng = substream(seed, "predictor-order")
    pred = LearnedPredictor.init(demos.obs_dim, window, hidden, rng)
    opt = Adam(pred.trainable_params(), lr)
    losses: list[float] = []
    n = len(windows)
    for _ in range(epochs):
        order = order_rng.permutation(n)
        total = 0.0
        for start in range(0, n, batch_size):
            idx = order[start:start + batch_size]
            ctx = np.stack([windows[i][0] for i in idx])
            tgt = np.stack([windows[i][1] for i in idx])
            loss, grads = pred.forced_loss_and_grads(ctx, tgt)
            total += loss
            opt.step(grads)
        losses.append(total / n)
    return pred, losses, skipped


# --- persistence ------------------------------------------------------------

def save_predictor(path, pred: LearnedPredictor) -> None:
    segs = dict(pred.trainable_params().segments)
    segs["meta_window"] = np.asarray(float(pred.window))
    segs["meta_hidden"] = np.asarray(float(pred.encoder.hidden_size))
    save_params(path, "predictor", ParamVector(segs))


def load_predictor(path) -> LearnedPredictor:
    kind, params = load_params(path)
    if kind != "predictor":
        raise ValueError(f"{path}: not a predictor params file")
    segs = params.segments
    window = int(float(segs.pop("meta_window")))
    hidden = int(float(segs.pop("meta_hidden")))
    enc = {k[4:]: v for k, v in segs.items() if k.startswith("enc.")}
    dec = {k[4:]: v for k, v in segs.items() if k.startswith("dec.")}
    head = {k[5:]: v for k, v in segs.items() if k.startswith("head.")}
    obs_dim = enc["Wz"].shape[0]
    return LearnedPredictor(
        GruCell(obs_dim, hidden, ParamVector(enc)),
        GruCell(obs_dim, hidden, ParamVector(dec)),
        Mlp([hidden, obs_dim], "linear", ParamVector(head)),
        window)
