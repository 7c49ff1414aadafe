import math

import numpy as np
import pytest

from oracle_twtl import oracle_rob, oracle_sat, oracle_spec, random_formula, \
    random_word
from twtlrl.twtl.ast import Concat, Disj, Hold, TRUE, Within
from twtlrl.twtl.parser import parse_spec
from twtlrl.twtl.semantics import ObservationWord, check_feasibility, \
    concrete_reward, robustness, satisfies, time_horizon


def word(values) -> ObservationWord:
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    return ObservationWord(arr)


@pytest.fixture
def simple_spec():
    return parse_spec("""
obs_dim 1
pred a := o[0]
formula := H^2 a
""")


def hvals_for(spec, w: ObservationWord):
    return {name: expr.eval_word(w.observations, spec.params)
            for name, expr in spec.predicates.items()}


def test_hold_satisfaction_and_robustness(simple_spec):
    f = Hold(2, "a")
    w = word([0.4, 0.2, 0.3, -1.0])
    assert satisfies(w, f, simple_spec)
    assert robustness(w, f, simple_spec) == pytest.approx(0.2)


def test_hold_window_too_short(simple_spec):
    f = Hold(5, "a")
    w = word([1.0, 1.0])
    assert not satisfies(w, f, simple_spec)
    assert robustness(w, f, simple_spec) == -math.inf


def test_hold_true_has_infinite_robustness(simple_spec):
    f = Hold(1, TRUE)
    w = word([-9.0, -9.0])
    assert satisfies(w, f, simple_spec)
    assert robustness(w, f, simple_spec) == math.inf


def test_disjunction_is_max(simple_spec):
    spec = parse_spec("""
obs_dim 1
pred a := o[0]
pred b := -o[0]
formula := H^0 a | H^0 b
""")
    w = word([0.3])
    assert robustness(w, spec.formula, spec) == pytest.approx(0.3)
    assert satisfies(w, spec.formula, spec)


def test_concat_splits_at_some_point():
    spec = parse_spec("""
obs_dim 2
pred a := o[0]
pred b := o[1]
formula := H^1 a . H^1 b
""")
    w = ObservationWord(np.array([[1.0, -1.0], [0.5, -1.0],
                                  [-1.0, 0.25], [-1.0, 0.75]]))
    assert satisfies(w, spec.formula, spec)
    assert robustness(w, spec.formula, spec) == pytest.approx(0.25)


def test_within_shifts_the_inner_window(simple_spec):
    f = Within(Hold(1, "a"), 1, 3)
    w = word([-1.0, -1.0, 0.5, 0.6])
    assert satisfies(w, f, simple_spec)
    assert robustness(w, f, simple_spec) == pytest.approx(0.5)


def test_time_horizon_composition():
    f = Concat(Within(Hold(3, "a"), 0, 5), Hold(2, "a"))
    assert time_horizon(f) == 5 + 2 + 1
    assert time_horizon(Disj(Hold(4, "a"), Hold(1, "a"))) == 4


def test_feasibility_check():
    ok, bad = check_feasibility(Within(Hold(3, "a"), 0, 5))
    assert ok and not bad
    ok, bad = check_feasibility(Within(Hold(9, "a"), 0, 5))
    assert not ok and len(bad) == 1


def test_concrete_reward_requires_full_horizon(simple_spec):
    w = word([1.0, 1.0])
    with pytest.raises(ValueError):
        concrete_reward(w, simple_spec.formula, simple_spec)
    w = word([1.0, 1.0, 1.0, -5.0])  # suffix beyond horizon is ignored
    assert concrete_reward(w, simple_spec.formula, simple_spec) == 1


def test_matches_oracle_on_random_instances():
    spec = oracle_spec()
    rng = np.random.default_rng(7)
    for _ in range(500):
        f = random_formula(rng, depth=int(rng.integers(0, 4)))
        w = ObservationWord(random_word(rng))
        hv = hvals_for(spec, w)
        i2 = len(w) - 1
        assert satisfies(w, f, spec) == oracle_sat(f, hv, 0, i2)
        assert robustness(w, f, spec) == oracle_rob(f, hv, 0, i2)


def test_sign_soundness_on_random_instances():
    spec = oracle_spec()
    rng = np.random.default_rng(11)
    for _ in range(500):
        f = random_formula(rng, depth=2)
        w = ObservationWord(random_word(rng))
        rob = robustness(w, f, spec)
        sat = satisfies(w, f, spec)
        if rob > 0:
            assert sat
        elif rob < 0:
            assert not sat
