"""End-to-end acceptance checks, one test per release criterion.

Each test prints a single summary line so a verbose run doubles as a
checklist.  The heavier training-matrix checks share one session-scoped
experiment fixture.
"""

import math

import numpy as np
import pytest

from oracle_twtl import oracle_rob, oracle_sat, oracle_spec, random_formula, \
    random_word
from test_nn import central_difference, flatten_grads, rel_err
from twtlrl.config import RunConfig
from twtlrl.envs import make_env
from twtlrl.experiment import default_spec_path, generate_demos, \
    load_spec_file, run_cell, steps_to_threshold
from twtlrl.gridworld import make_gridworld, verify_shaping
from twtlrl.nn import Mlp
from twtlrl.policy import HybridPolicy
from twtlrl.predictor import LearnedPredictor, RolloutPredictor
from twtlrl.seeding import substream
from twtlrl.trainer import PpoConfig, behavior_clone, compute_gae, \
    degrade_policy, evaluate, potential_value
from twtlrl.twtl.semantics import ObservationWord, robustness, satisfies, \
    time_horizon


def report(name: str, detail: str) -> None:
    print(f"[acceptance] {name}: PASS ({detail})")


# --- 1. landing-task horizon -------------------------------------------------

def test_c01_landing_spec_horizon():
    spec = load_spec_file(default_spec_path("lander").replace(
        "lander.twtl", "lander_example1.twtl"))
    h = time_horizon(spec.formula)
    assert h == 1403
    report("landing-spec horizon", f"time_horizon = {h}")


# --- 2. evaluator equivalence with the brute-force oracle --------------------

def test_c02_twtl_oracle_equivalence():
    spec = oracle_spec()
    rng = substream(0, "acceptance-oracle")
    checked = 0
    for _ in range(10_000):
        f = random_formula(rng, depth=int(rng.integers(0, 4)))
        obs = random_word(rng, max_len=12)
        word = ObservationWord(obs)
        hvals = {name: expr.eval_word(obs, spec.params)
                 for name, expr in spec.predicates.items()}
        n = len(obs) - 1
        sat = satisfies(word, f, spec)
        rob = robustness(word, f, spec)
        assert sat == oracle_sat(f, hvals, 0, n)
        assert rob == oracle_rob(f, hvals, 0, n)
        if rob > 0:
            assert sat
        if rob < 0:
            assert not sat
        checked += 1
    report("evaluator vs brute-force oracle", f"{checked} instances, exact")


# --- 3. analytic gradients vs central finite differences ---------------------

def test_c03_gradient_suite():
    rng = substream(1, "acceptance-grad")
    worst = {"policy": 0.0, "value": 0.0, "predictor": 0.0}

    for _ in range(100):
        offline = Mlp.init([3, 4, 3], "softmax", rng)
        policy = HybridPolicy.init(offline, [4], rng,
                                   alpha0=float(rng.uniform(0.05, 0.95)))
        x = rng.normal(size=3)
        action = int(rng.integers(3))
        params = policy.trainable_params()
        _, grads = policy.log_prob_grad(x, action)
        num = central_difference(
            params, lambda: float(np.log(policy.action_probs(x)[action])))
        worst["policy"] = max(worst["policy"],
                              rel_err(flatten_grads(params, grads), num))

    for _ in range(100):
        net = Mlp.init([3, 6, 1], "linear", rng)
        x = rng.normal(size=(4, 3))
        target = rng.normal(size=(4, 1))

        def loss():
            out, _ = net.forward(x)
            return float(np.sum((out - target) ** 2))

        out, cache = net.forward(x)
        grads, _ = net.backward(cache, 2.0 * (out - target))
        num = central_difference(net.params, loss)
        worst["value"] = max(worst["value"],
                             rel_err(flatten_grads(net.params, grads), num))

    for _ in range(100):
        pred = LearnedPredictor.init(2, window=3, hidden=4, rng=rng)
        contexts = rng.normal(size=(2, 3, 2))
        targets = rng.normal(size=(2, 2, 2))
        params = pred.trainable_params()
        _, grads = pred.forced_loss_and_grads(contexts, targets)
        num = central_difference(
            params, lambda: pred.forced_loss_and_grads(contexts, targets)[0])
        worst["predictor"] = max(worst["predictor"],
                                 rel_err(flatten_grads(params, grads), num))

    assert all(err < 1e-4 for err in worst.values()), worst
    report("gradient suite", "100 draws each, max rel err "
           + ", ".join(f"{k}={v:.2e}" for k, v in worst.items()))


# --- 4. advantage estimator vs double-loop oracle ----------------------------

def test_c04_gae_oracle_and_identities():
    from test_trainer import gae_oracle, random_gae_instance
    rng = substream(2, "acceptance-gae")
    for _ in range(1000):
        r, v, nv, ends = random_gae_instance(rng)
        gamma = float(rng.uniform(0.5, 0.999))
        lam = float(rng.uniform(0.0, 1.0))
        adv, tgt = compute_gae(r, v, nv, ends, gamma, lam)
        adv_o, tgt_o = gae_oracle(r, v, nv, ends, gamma, lam)
        assert np.array_equal(adv, adv_o) and np.array_equal(tgt, tgt_o)

    # lambda = 0 reduces to the one-step TD residual
    r, v, nv, ends = random_gae_instance(rng)
    adv, _ = compute_gae(r, v, nv, ends, 0.9, 0.0)
    assert np.array_equal(adv, np.asarray(r) + 0.9 * np.asarray(nv) - v)

    # gamma = lambda = 1 telescopes to (undiscounted return) - V
    T = 9
    r2, v2 = rng.normal(size=T), rng.normal(size=T)
    nv2 = np.concatenate([v2[1:], [0.0]])
    ends2 = np.zeros(T, dtype=bool)
    ends2[-1] = True
    adv2, _ = compute_gae(r2, v2, nv2, ends2, 1.0, 1.0)
    assert np.allclose(adv2, [r2[t:].sum() - v2[t] for t in range(T)],
                       atol=1e-12)
    report("advantage estimator", "1000 instances exact; identities hold")


# --- 5. shaping invariance on the gridworld ----------------------------------

def test_c05_shaping_invariance():
    mdp = make_gridworld(size=5, slip=0.1)
    rng = substream(3, "acceptance-shaping")
    worst = 0.0
    for _ in range(50):
        phi = rng.normal(0.0, 5.0, size=mdp.n_states)
        ok, rep = verify_shaping(mdp, phi, form="potential")
        assert ok, rep["mismatches"]
        worst = max(worst, rep["value_shift_error"])
    assert worst < 1e-8
    report("shaping invariance", f"50/50 trials, max V-shift err {worst:.2e}")


# --- 6. shaped-reward telescoping along complete episodes --------------------

def test_c06_shaping_telescopes():
    spec = load_spec_file(default_spec_path("pendulum"))
    env = make_env("pendulum", episode_len=40)
    pred = RolloutPredictor(env, noop_action=1)
    gamma = 0.97
    rng = substream(4, "acceptance-telescope")
    worst = 0.0
    for _ in range(100):
        s = env.reset(rng=rng)
        states = [s.copy()]
        while True:
            res = env.step(int(rng.integers(3)))
            states.append(res.next_state.copy())
            if res.terminated or res.truncated:
                break
        phis = [potential_value(x, pred, spec, 100.0) for x in states]
        n = len(phis) - 1
        incs = [gamma * phis[i + 1] - phis[i] for i in range(n)]
        discounted = sum(gamma ** i * f for i, f in enumerate(incs))
        err = abs(discounted - (gamma ** n * phis[-1] - phis[0]))
        assert err < 1e-9
        worst = max(worst, err)
    report("shaping telescoping", f"100 episodes, max err {worst:.2e}")


# --- 7. weight noise strictly hurts the cloned expert ------------------------

def test_c07_degradation_monotonicity():
    spec = load_spec_file(default_spec_path("pendulum"))
    demos, _ = generate_demos("pendulum", "expert", 30, 0, spec)
    policy, _ = behavior_clone(demos, 3, 40, 1e-3, 0)
    degraded = degrade_policy(policy, 0.5, 1)
    base = evaluate(policy, "pendulum", 20, 202, spec)
    worse = evaluate(degraded, "pendulum", 20, 202, spec)
    assert worse.mean_return < base.mean_return
    report("degradation monotonicity",
           f"{worse.mean_return} < {base.mean_return} over 20 episodes")


# --- 8/9. training matrix ----------------------------------------------------

MATRIX_VARIANTS = ("vanilla", "mixing", "shaping+mixing")
MATRIX_SEEDS = (0, 1, 2, 3, 4)


@pytest.fixture(scope="session")
def training_matrix(tmp_path_factory):
    cfg = RunConfig(ppo=PpoConfig(total_steps=30720, rollout_steps=2048),
                    demo_episodes=30, degrade_sigma=0.5,
                    predictor_epochs=4, predictor_stride=8)
    out = tmp_path_factory.mktemp("matrix")
    rows = {}
    for variant in MATRIX_VARIANTS:
        for seed in MATRIX_SEEDS:
            run_dir = out / variant.replace("+", "-") / f"seed{seed}"
            rows[variant, seed] = run_cell(cfg, variant, seed, str(run_dir))
    return rows


def _median_stt(rows, variant):
    stts = [rows[variant, s]["steps_to_threshold"] for s in MATRIX_SEEDS]
    return float(np.median([math.inf if v == "" else float(v) for v in stts]))


def test_c08_learning_curve_trend(training_matrix):
    med = {v: _median_stt(training_matrix, v) for v in MATRIX_VARIANTS}
    assert med["shaping+mixing"] <= med["mixing"] <= med["vanilla"]
    wins = sum(training_matrix["shaping+mixing", s]["final_return"]
               >= training_matrix["vanilla", s]["final_return"]
               for s in MATRIX_SEEDS)
    assert wins >= 4
    report("learning-curve trend",
           f"median steps-to-threshold {med['shaping+mixing']} <= "
           f"{med['mixing']} <= {med['vanilla']}; final-return wins {wins}/5")


def test_c09_hybrid_beats_offline(training_matrix):
    pend = training_matrix["mixing", 0]
    assert pend["final_return"] >= pend["offline_return"]

    cfg = RunConfig(env_kind="lander", degrade_sigma=0.3,
                    ppo=PpoConfig(total_steps=20480, rollout_steps=2048),
                    demo_episodes=30, predictor_epochs=4, predictor_stride=8)
    import tempfile
    with tempfile.TemporaryDirectory() as d:
        land = run_cell(cfg, "mixing", 0, d)
    assert land["final_return"] >= land["offline_return"]
    report("hybrid beats offline",
           f"pendulum {pend['final_return']} >= {pend['offline_return']}; "
           f"lander {land['final_return']} >= {land['offline_return']}")


# --- 10. bytewise determinism ------------------------------------------------

def test_c10_determinism(tmp_path):
    cfg = RunConfig(ppo=PpoConfig(total_steps=1024, rollout_steps=256,
                                  epochs=2),
                    demo_episodes=3, bc_epochs=3,
                    predictor_epochs=1, predictor_stride=16)
    run_cell(cfg, "shaping+mixing", 7, str(tmp_path / "a"))
    run_cell(cfg, "shaping+mixing", 7, str(tmp_path / "b"))
    a = (tmp_path / "a" / "metrics.csv").read_bytes()
    b = (tmp_path / "b" / "metrics.csv").read_bytes()
    assert a == b
    report("determinism", f"metrics.csv byte-identical ({len(a)} bytes)")
