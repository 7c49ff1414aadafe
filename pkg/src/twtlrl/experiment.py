"""Experiment driver: demo generation and the variant-by-seed training matrix.

For each (variant, seed) cell the pipeline is:

    scripted-expert demos -> behavior-clone an offline policy -> degrade it
    -> (optionally) train an observation predictor -> train with/without
    policy mixing and reward shaping -> greedy evaluation.

Variants: ``vanilla`` (plain policy, base rewards), ``shaping`` (plain
policy, shaped rewards), ``mixing`` (hybrid policy, base rewards), and
``shaping+mixing``.  Every cell gets its own run directory with the
resolved config, metrics.csv, and persisted params; ``summary.csv``
aggregates final return, steps-to-threshold, and satisfaction rate.
"""

from __future__ import annotations

import csv
import os
from importlib import resources

import numpy as np

from .config import RunConfig
from .envs import make_env
from .experts import make_controller
from .nn import Mlp
from .policy import HybridPolicy, save_policy
from .predictor import DemonstrationSet, RolloutPredictor, Trajectory, \
    save_demos, save_predictor, train_predictor
from .seeding import substream, substream_seed
from .trainer import appo_train, behavior_clone, degrade_policy, evaluate
from .twtl.parser import parse_spec
from .twtl.semantics import satisfies, time_horizon
from .trainer import _episode_word  # shared padding rule

__all__ = ["default_spec_path", "load_spec_file", "generate_demos",
           "DemoQualityError", "run_cell", "run_experiment",
           "steps_to_threshold"]


class DemoQualityError(RuntimeError):
    """The scripted expert fell below its satisfaction quality bar."""


def default_spec_path(env_kind: str) -> str:
    return str(resources.files("twtlrl").joinpath(f"specs/{env_kind}.twtl"))


def load_spec_file(path: str):
    with open(path) as fh:
        return parse_spec(fh.read())


_QUALITY_BARS = {"lander": 0.9, "pendulum": 0.95}


def generate_demos(env_kind: str, controller_name: str, episodes: int,
                   seed: int, spec=None, env_overrides: dict | None = None
                   ) -> tuple[DemonstrationSet, dict]:
    """Roll out a scripted controller; asserts the expert quality bar.

    Returns the demonstration set and a stats dict with the satisfaction
    rate (against ``spec`` when given) and mean return.
    """
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    env = make_env(env_kind, **(env_overrides or {}))
    rng = substream(seed, "env")
    ctrl_rng = substream(seed, "controller")
    controller = make_controller(env_kind, controller_name, ctrl_rng)
    horizon = time_horizon(spec.formula) if spec is not None else 0
    trajs, sats, returns = [], [], []
    for _ in range(episodes):
        s = env.reset(rng=rng)
        states, actions, rewards = [s.copy()], [], []
        t = 0
        total = 0.0
        while True:
            a = controller(s, t)
            res = env.step(a)
            actions.append(a)
            rewards.append(res.base_reward)
            total += res.base_reward
            s = res.next_state
            states.append(s.copy())
            t += 1
            if res.terminated or res.truncated:
                break
        trajs.append(Trajectory(np.array(states), np.array(actions),
                                np.array(rewards)))
        returns.append(total)
        if spec is not None:
            word = _episode_word(states, horizon)
            sats.append(float(satisfies(word, spec.formula, spec)))
    stats = {"satisfaction_rate": float(np.mean(sats)) if sats else 0.0,
             "mean_return": float(np.mean(returns))}
    bar = _QUALITY_BARS.get(env_kind, 0.0)
    if controller_name == "expert" and spec is not None \
            and stats["satisfaction_rate"] < bar:
        raise DemoQualityError(
            f"expert satisfaction rate {stats['satisfaction_rate']:.2f} "
            f"below the {bar} bar on {env_kind}")
    return DemonstrationSet(tuple(trajs)), stats


def steps_to_threshold(metrics: list[dict], threshold: float,
                       window: int = 10) -> int | None:
    """First logged step count whose trailing moving-average return exceeds
    the threshold, or None if it never does."""
    returns = [row["mean_return"] for row in metrics]
    for i in range(len(returns)):
        lo = max(0, i - window + 1)
        if float(np.mean(returns[lo:i + 1])) > threshold:
            return int(metrics[i]["steps"])
    return None


def run_cell(cfg: RunConfig, variant: str, seed: int, run_dir: str) -> dict:
    """Run one variant x seed pipeline cell; returns its summary row."""
    os.makedirs(run_dir, exist_ok=True)
    spec_path = cfg.spec_path or default_spec_path(cfg.env_kind)
    spec = load_spec_file(spec_path)
    resolved = cfg.to_text() + f"\n[cell]\nvariant = {variant}\nseed = {seed}\n"
    with open(os.path.join(run_dir, "config.txt"), "w") as fh:
        fh.write(resolved)

    demos, demo_stats = generate_demos(
        cfg.env_kind, cfg.demo_controller, cfg.demo_episodes,
        substream_seed(seed, "demos"), spec, cfg.env_overrides)
    save_demos(os.path.join(run_dir, "demos.csv"), demos)

    env = make_env(cfg.env_kind, **cfg.env_overrides)
    offline, _ = behavior_clone(demos, env.n_actions, cfg.bc_epochs, cfg.bc_lr,
                                substream_seed(seed, "bc"),
                                hidden=tuple(cfg.bc_hidden))
    offline = degrade_policy(offline, cfg.degrade_sigma,
                             substream_seed(seed, "degrade"))
    save_policy(os.path.join(run_dir, "offline.params"), offline)

    predictor = None
    if "shaping" in variant:
        if cfg.predictor_kind == "rollout":
            predictor = RolloutPredictor(env, offline)
        else:
            horizon = time_horizon(spec.formula)
            predictor, _, _ = train_predictor(
                demos, horizon, cfg.predictor_window, cfg.predictor_epochs,
                cfg.predictor_lr, substream_seed(seed, "predictor"),
                hidden=cfg.predictor_hidden, stride=cfg.predictor_stride)
            save_predictor(os.path.join(run_dir, "predictor.params"), predictor)

    init_rng = substream(seed, "policy-init")
    if "mixing" in variant:
        policy = HybridPolicy.init(offline.net, list(cfg.policy_hidden),
                                   init_rng, alpha0=cfg.alpha0)
    else:
        from .policy import SoftmaxPolicy
        policy = SoftmaxPolicy.init(env.obs_dim, list(cfg.policy_hidden),
                                    env.n_actions, init_rng)
    value_net = Mlp.init([env.obs_dim, *cfg.value_hidden, 1], "linear",
                         substream(seed, "value-init"))

    metrics = appo_train(cfg.ppo, cfg.env_kind, spec, policy, value_net,
                         predictor, seed, run_dir,
                         env_overrides=cfg.env_overrides)

    final = evaluate(policy, cfg.env_kind, 20, substream_seed(seed, "final-eval"),
                     spec, cfg.env_overrides)
    offline_eval = evaluate(offline, cfg.env_kind, 20,
                            substream_seed(seed, "final-eval"), spec,
                            cfg.env_overrides)
    stt = steps_to_threshold(metrics, cfg.threshold, cfg.threshold_window)
    return {"variant": variant, "seed": seed,
            "final_return": final.mean_return,
            "steps_to_threshold": stt if stt is not None else "",
            "satisfaction_rate": final.satisfaction_rate,
            "offline_return": offline_eval.mean_return,
            "demo_satisfaction": demo_stats["satisfaction_rate"],
            "error": ""}


SUMMARY_COLUMNS = ("variant", "seed", "final_return", "steps_to_threshold",
                   "satisfaction_rate", "offline_return", "demo_satisfaction",
                   "error")


def run_experiment(cfg: RunConfig) -> list[dict]:
    """Run the full variant x seed matrix; writes summary.csv in out_dir."""
    os.makedirs(cfg.out_dir, exist_ok=True)
    rows: list[dict] = []
    for variant in cfg.variants:
        for seed in cfg.seeds:
            run_dir = os.path.join(cfg.out_dir, variant.replace("+", "-"),
                                   f"seed{seed}")
            try:
                rows.append(run_cell(cfg, variant, seed, run_dir))
            except Exception as exc:  # record the failure, keep the matrix going
                rows.append({"variant": variant, "seed": seed,
                             "final_return": "", "steps_to_threshold": "",
                             "satisfaction_rate": "", "offline_return": "",
                             "demo_satisfaction": "",
                             "error": f"{type(exc).__name__}: {exc}"})
    # per-variant aggregates over clean cells
    for variant in cfg.variants:
        cells = [r for r in rows if r["variant"] == variant and not r["error"]]
        if not cells:
            continue
        stts = [r["steps_to_threshold"] for r in cells
                if r["steps_to_threshold"] != ""]
        rows.append({
            "variant": variant, "seed": "all",
            "final_return": float(np.mean([r["final_return"] for r in cells])),
            "steps_to_threshold": float(np.median(stts)) if stts else "",
            "satisfaction_rate": float(np.mean(
                [r["satisfaction_rate"] for r in cells])),
            "offline_return": float(np.mean(
                [r["offline_return"] for r in cells])),
            "demo_satisfaction": float(np.mean(
                [r["demo_satisfaction"] for r in cells])),
            "error": ""})
    with open(os.path.join(cfg.out_dir, "summary.csv"), "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=SUMMARY_COLUMNS)
        w.writeheader()
        w.writerows(rows)
    return rows
