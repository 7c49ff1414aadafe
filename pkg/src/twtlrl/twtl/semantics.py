"""Quantitative and Boolean evaluation of TWTL formulas over finite words.

Conventions:

- A word is a finite sequence of observation vectors; positions are 0-based
  offsets into the word (the word's ``start_index`` is bookkeeping only).
- An atomic proposition holds at a step iff its predicate expression is
  strictly positive there.
- Robustness is an extended real; ``+inf``/``-inf`` are the identities of
  min/max (a hold over the constant-true target has robustness ``+inf``,
  a window too short for its operator has robustness ``-inf``).
- Sign soundness: robustness > 0 implies Boolean satisfaction and
  robustness < 0 implies violation.  Robustness exactly 0 makes no claim
  (Boolean satisfaction is strict).

Both evaluators memoize on (node, window) pairs, so a word of length L costs
O(|formula| * L^2) instead of the exponential naive recursion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ast import Concat, Disj, Formula, Hold, SpecFile, TRUE, Within

__all__ = ["ObservationWord", "time_horizon", "check_feasibility",
           "infeasible_within_nodes", "eval_predicate", "satisfies",
           "robustness", "concrete_reward"]


@dataclass(frozen=True)
class ObservationWord:
    """A finite observation word o_{t1, t1+L-1} with L >= 1."""
    observations: np.ndarray  # (L, obs_dim)
    start_index: int = 0

    def __post_init__(self):
        obs = np.asarray(self.observations, dtype=float)
        if obs.ndim != 2 or obs.shape[0] < 1:
            raise ValueError("word must be a nonempty (L, d) array")
        if self.start_index < 0:
            raise ValueError("start_index must be >= 0")
        object.__setattr__(self, "observations", obs)

    def __len__(self) -> int:
        return self.observations.shape[0]


def time_horizon(f: Formula) -> int:
    """Minimum word length (minus one) needed to decide the formula."""
    match f:
        case Hold(d, _):
            return d
        case Concat(left, right):
            return time_horizon(left) + time_horizon(right) + 1
        case Disj(left, right):
            return max(time_horizon(left), time_horizon(right))
        case Within(_, _, b):
            return b
    raise TypeError(f"not a formula node: {f!r}")


def infeasible_within_nodes(f: Formula) -> list[Within]:
    """Within nodes whose window is shorter than the enclosed task."""
    bad: list[Within] = []
    match f:
        case Hold():
            pass
        case Concat(left, right) | Disj(left, right):
            bad += infeasible_within_nodes(left)
            bad += infeasible_within_nodes(right)
        case Within(inner, a, b):
            if b - a < time_horizon(inner):
                bad.append(f)
            bad += infeasible_within_nodes(inner)
    return bad


def check_feasibility(f: Formula) -> tuple[bool, list[Within]]:
    bad = infeasible_within_nodes(f)
    return not bad, bad


def eval_predicate(expr, obs, params) -> float:
    """Evaluate a predicate expression on one observation vector."""
    return float(expr.eval(np.asarray(obs, dtype=float), params))


class _WordEvaluator:
    """Shared machinery: per-proposition value arrays plus two memo tables."""

    def __init__(self, word: ObservationWord, spec: SpecFile):
        obs = word.observations
        if obs.shape[1] != spec.obs_dim:
            raise ValueError(
                f"word dimension {obs.shape[1]} != spec obs_dim {spec.obs_dim}")
        self.length = obs.shape[0]
        self.hvals = {name: np.asarray(expr.eval_word(obs, spec.params), dtype=float)
                      for name, expr in spec.predicates.items()}
        self._rob: dict[tuple[int, int, int], float] = {}
        self._sat: dict[tuple[int, int, int], bool] = {}

    # Hold and Within values depend only on the window start once the
    # window is long enough; collapsing the memo key on i2 turns the
    # O(L^2)-window recursion into O(L) distinct evaluations for them.
    @staticmethod
    def _key(f: Formula, i1: int, i2: int) -> tuple[int, int, int]:
        match f:
            case Hold(d, _):
                if i2 - i1 >= d:
                    return (id(f), i1, -1)
            case Within(_, _, b):
                if i2 - i1 >= b:
                    return (id(f), i1, -1)
        return (id(f), i1, i2)

    # Boolean semantics.  The concatenation split is the earliest position
    # where both the prefix and suffix requirements hold.
    def sat(self, f: Formula, i1: int, i2: int) -> bool:
        key = self._key(f, i1, i2)
        got = self._sat.get(key)
        if got is not None:
            return got
        match f:
            case Hold(d, target):
                if i2 - i1 < d:
                    out = False
                elif target == TRUE:
                    out = True
                else:
                    out = bool(np.all(self.hvals[target][i1:i1 + d + 1] > 0))
            case Disj(left, right):
                out = self.sat(left, i1, i2) or self.sat(right, i1, i2)
            case Concat(left, right):
                out = any(self.sat(left, i1, i) and self.sat(right, i + 1, i2)
                          for i in range(i1, i2))
            case Within(inner, a, b):
                out = (i2 - i1 >= b) and any(
                    self.sat(inner, i, i1 + b) for i in range(i1 + a, i1 + b + 1))
            case _:
                raise TypeError(f"not a formula node: {f!r}")
        self._sat[key] = out
        return out

    def rob(self, f: Formula, i1: int, i2: int) -> float:
        key = self._key(f, i1, i2)
        got = self._rob.get(key)
        if got is not None:
            return got
        match f:
            case Hold(d, target):
                if i2 - i1 < d:
                    out = -math.inf
                elif target == TRUE:
                    out = math.inf
                else:
                    out = float(np.min(self.hvals[target][i1:i1 + d + 1]))
            case Disj(left, right):
                out = max(self.rob(left, i1, i2), self.rob(right, i1, i2))
            case Concat(left, right):
                out = -math.inf
                for i in range(i1, i2):
                    v = min(self.rob(left, i1, i), self.rob(right, i + 1, i2))
                    if v > out:
                        out = v
            case Within(inner, a, b):
                if i2 - i1 < b:
                    out = -math.inf
                else:
                    out = max(self.rob(inner, i, i1 + b)
                              for i in range(i1 + a, i1 + b + 1))
            case _:
                raise TypeError(f"not a formula node: {f!r}")
        self._rob[key] = out
        return out


def satisfies(word: ObservationWord, f: Formula, spec: SpecFile) -> bool:
    """Boolean satisfaction of the formula over the whole word."""
    return _WordEvaluator(word, spec).sat(f, 0, len(word) - 1)


def robustness(word: ObservationWord, f: Formula, spec: SpecFile) -> float:
    """Robustness degree of the word against the formula (may be +-inf)."""
    return _WordEvaluator(word, spec).rob(f, 0, len(word) - 1)


def concrete_reward(word: ObservationWord, f: Formula, spec: SpecFile) -> int:
    """Episodic 0/1 reward over the horizon-length prefix of the word."""
    h = time_horizon(f)
    if len(word) < h + 1:
        raise ValueError(
            f"word of length {len(word)} too short for horizon {h} (need {h + 1})")
    prefix = ObservationWord(word.observations[:h + 1], word.start_index)
    return 1 if satisfies(prefix, f, spec) else 0
