"""Command-line entry point binding spec tooling, training, and experiments.

Exit codes: 0 success, 1 domain failure (violation, below-threshold,
divergence), 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from .config import ConfigError, RunConfig, VARIANTS
from .envs import ENV_KINDS, make_env
from .experiment import DemoQualityError, default_spec_path, generate_demos, \
    load_spec_file, run_cell, run_experiment
from .gridworld import make_gridworld, verify_shaping
from .nn import Mlp
from .policy import load_policy, save_policy
from .predictor import load_demos, save_demos, save_predictor, train_predictor
from .seeding import substream
from .trainer import PpoConfig, appo_train, behavior_clone, degrade_policy, \
    evaluate
from .twtl.parser import SpecError, parse_spec, spec_to_text
from .twtl.semantics import ObservationWord, robustness, satisfies, \
    time_horizon

__all__ = ["main"]


def _load_spec(path: str):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(str(exc)) from exc
    return parse_spec(text)


def _cmd_parse(args) -> int:
    spec = _load_spec(args.spec)
    sys.stdout.write(spec_to_text(spec))
    return 0


def _cmd_horizon(args) -> int:
    spec = _load_spec(args.spec)
    print(time_horizon(spec.formula))
    return 0


def _cmd_monitor(args) -> int:
    spec = _load_spec(args.spec)
    try:
        rows = np.loadtxt(args.word, delimiter=",", ndmin=2)
    except OSError as exc:
        raise ConfigError(str(exc)) from exc
    word = ObservationWord(rows)
    sat = satisfies(word, spec.formula, spec)
    rob = robustness(word, spec.formula, spec)
    print(f"satisfied {'true' if sat else 'false'}")
    print(f"robustness {rob}")
    return 0 if sat else 1


def _cmd_gen_demos(args) -> int:
    spec = _load_spec(args.spec) if args.spec else \
        load_spec_file(default_spec_path(args.env))
    try:
        demos, stats = generate_demos(args.env, args.controller, args.episodes,
                                      args.seed, spec)
    except DemoQualityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    save_demos(args.out, demos)
    print(f"episodes {len(demos)}")
    print(f"satisfaction_rate {stats['satisfaction_rate']}")
    print(f"mean_return {stats['mean_return']}")
    return 0


def _cmd_bc(args) -> int:
    demos = load_demos(args.demos)
    env = make_env(args.env)
    policy, losses = behavior_clone(demos, env.n_actions, args.epochs,
                                    args.lr, args.seed,
                                    hidden=tuple(args.hidden))
    save_policy(args.out, policy)
    print(f"final_nll {losses[-1] if losses else float('nan')}")
    return 0


def _cmd_degrade(args) -> int:
    policy = load_policy(args.policy)
    save_policy(args.out, degrade_policy(policy, args.sigma, args.seed))
    print(f"sigma {args.sigma}")
    return 0


def _cmd_train_predictor(args) -> int:
    demos = load_demos(args.demos)
    spec = _load_spec(args.spec)
    pred, losses, skipped = train_predictor(
        demos, time_horizon(spec.formula), args.window, args.epochs, args.lr,
        args.seed, hidden=args.hidden, stride=args.stride)
    save_predictor(args.out, pred)
    print(f"final_loss {losses[-1] if losses else float('nan')}")
    print(f"skipped_trajectories {skipped}")
    return 0


def _cmd_train(args) -> int:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    row = run_cell(cfg, args.variant, args.seed, args.out)
    for key in ("final_return", "steps_to_threshold", "satisfaction_rate"):
        print(f"{key} {row[key]}")
    return 0


def _cmd_eval(args) -> int:
    policy = load_policy(args.policy)
    spec = _load_spec(args.spec) if args.spec else \
        load_spec_file(default_spec_path(args.env))
    res = evaluate(policy, args.env, args.episodes, args.seed, spec)
    print(f"mean_return {res.mean_return}")
    print(f"std_return {res.std_return}")
    print(f"satisfaction_rate {res.satisfaction_rate}")
    return 0


def _cmd_verify_shaping(args) -> int:
    mdp = make_gridworld()
    rng = substream(args.seed, "shaping-trials")
    passed = 0
    worst = 0.0
    for _ in range(args.trials):
        phi = rng.normal(0.0, 5.0, size=mdp.n_states)
        ok, report = verify_shaping(mdp, phi, form=args.form)
        passed += ok
        worst = max(worst, report["value_shift_error"])
    print(f"passed {passed}/{args.trials}")
    if args.form == "potential":
        print(f"max_value_shift_error {worst}")
        return 0 if passed == args.trials else 1
    return 0


def _cmd_experiment(args) -> int:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    if args.out:
        cfg.out_dir = args.out
    rows = run_experiment(cfg)
    bad = [r for r in rows if r["error"]]
    for r in rows:
        print(",".join(str(r[k]) for k in
                       ("variant", "seed", "final_return",
                        "steps_to_threshold", "satisfaction_rate")))
    return 1 if bad else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="twtlrl",
                                description="Temporal-task RL toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("parse", help="validate a task spec, print canonical form")
    sp.add_argument("spec")
    sp.set_defaults(func=_cmd_parse)

    sp = sub.add_parser("horizon", help="print the formula time horizon")
    sp.add_argument("spec")
    sp.set_defaults(func=_cmd_horizon)

    sp = sub.add_parser("monitor", help="evaluate a spec on an observation CSV")
    sp.add_argument("spec")
    sp.add_argument("--word", required=True, help="CSV, one observation per row")
    sp.set_defaults(func=_cmd_monitor)

    sp = sub.add_parser("gen-demos", help="roll out a scripted controller")
    sp.add_argument("--env", choices=ENV_KINDS, required=True)
    sp.add_argument("--controller", choices=("expert", "random"),
                    default="expert")
    sp.add_argument("--episodes", type=int, default=30)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--spec", default="")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_gen_demos)

    sp = sub.add_parser("bc", help="behavior-clone a policy from demos")
    sp.add_argument("--demos", required=True)
    sp.add_argument("--env", choices=ENV_KINDS, required=True)
    sp.add_argument("--epochs", type=int, default=40)
    sp.add_argument("--lr", type=float, default=1e-3)
    sp.add_argument("--hidden", type=int, nargs="+", default=[32, 32])
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_bc)

    sp = sub.add_parser("degrade", help="Gaussian-perturb policy weights")
    sp.add_argument("--policy", required=True)
    sp.add_argument("--sigma", type=float, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_degrade)

    sp = sub.add_parser("train-predictor",
                        help="fit the recurrent observation predictor")
    sp.add_argument("--demos", required=True)
    sp.add_argument("--spec", required=True)
    sp.add_argument("--window", type=int, default=4)
    sp.add_argument("--epochs", type=int, default=20)
    sp.add_argument("--lr", type=float, default=1e-3)
    sp.add_argument("--hidden", type=int, default=32)
    sp.add_argument("--stride", type=int, default=1)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_train_predictor)

    sp = sub.add_parser("train", help="run one training pipeline cell")
    sp.add_argument("--config", default="")
    sp.add_argument("--variant", choices=VARIANTS, default="vanilla")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_train)

    sp = sub.add_parser("eval", help="greedy evaluation of a saved policy")
    sp.add_argument("--policy", required=True)
    sp.add_argument("--env", choices=ENV_KINDS, required=True)
    sp.add_argument("--episodes", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--spec", default="")
    sp.set_defaults(func=_cmd_eval)

    sp = sub.add_parser("verify-shaping",
                        help="check argmax invariance under reward shaping")
    sp.add_argument("--trials", type=int, default=50)
    sp.add_argument("--form", choices=("potential", "reverse"),
                    default="potential")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=_cmd_verify_shaping)

    sp = sub.add_parser("experiment", help="run the variant x seed matrix")
    sp.add_argument("--config", default="")
    sp.add_argument("--out", default="")
    sp.set_defaults(func=_cmd_experiment)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SpecError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
