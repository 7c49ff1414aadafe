"""AST node types for TWTL formulas and predicate expressions.

Formulas are built from four operators: hold (H^d), concatenation (.),
disjunction (|) and within ([phi]^[a,b]).  Atomic propositions are named
references into a predicate table; a proposition is true at a time step
exactly when its predicate expression evaluates to a strictly positive
value on the observation at that step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Formula", "Hold", "Concat", "Disj", "Within", "TRUE",
    "PredicateExpr", "Const", "ObsComponent", "ParamRef", "Neg",
    "Add", "Sub", "Mul", "AbsExpr", "MinExpr", "MaxExpr", "IndExpr",
    "SpecFile",
]


# --- formulas ---------------------------------------------------------------

TRUE = "T"  # target of a hold over the constant-true proposition


@dataclass(frozen=True)
class Hold:
    """H^d s: s must hold at every step of the first d+1 steps."""
    duration: int
    target: str  # proposition name, or TRUE

    def __post_init__(self):
        if self.duration < 0:
            raise ValueError("hold duration must be >= 0")


@dataclass(frozen=True)
class Concat:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Disj:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Within:
    inner: "Formula"
    lo: int
    hi: int

    def __post_init__(self):
        if self.lo < 0 or self.hi < self.lo:
            raise ValueError("within window must satisfy 0 <= a <= b")


Formula = Hold | Concat | Disj | Within


def propositions(f: Formula) -> set[str]:
    """Names of all atomic propositions referenced by the formula."""
    match f:
        case Hold(_, target):
            return set() if target == TRUE else {target}
        case Concat(left, right) | Disj(left, right):
            return propositions(left) | propositions(right)
        case Within(inner, _, _):
            return propositions(inner)
    raise TypeError(f"not a formula node: {f!r}")


# --- predicate expressions --------------------------------------------------
#
# Each node evaluates either on a single observation vector (``eval``) or on
# a whole word at once (``eval_word``, one value per row of an (L, d) array).


@dataclass(frozen=True)
class Const:
    value: float

    def eval(self, obs, params):
        return self.value

    def eval_word(self, obs, params):
        return np.full(obs.shape[0], self.value)


@dataclass(frozen=True)
class ObsComponent:
    index: int

    def eval(self, obs, params):
        return float(obs[self.index])

    def eval_word(self, obs, params):
        return obs[:, self.index]


@dataclass(frozen=True)
class ParamRef:
    name: str

    def eval(self, obs, params):
        return params[self.name]

    def eval_word(self, obs, params):
        return np.full(obs.shape[0], params[self.name])


@dataclass(frozen=True)
class Neg:
    arg: "PredicateExpr"

    def eval(self, obs, params):
        return -self.arg.eval(obs, params)

    def eval_word(self, obs, params):
        return -self.arg.eval_word(obs, params)


@dataclass(frozen=True)
class Add:
    left: "PredicateExpr"
    right: "PredicateExpr"

    def eval(self, obs, params):
        return self.left.eval(obs, params) + self.right.eval(obs, params)

    def eval_word(self, obs, params):
        return self.left.eval_word(obs, params) + self.right.eval_word(obs, params)


@dataclass(frozen=True)
class Sub:
    left: "PredicateExpr"
    right: "PredicateExpr"

    def eval(self, obs, params):
        return self.left.eval(obs, params) - self.right.eval(obs, params)

    def eval_word(self, obs, params):
        return self.left.eval_word(obs, params) - self.right.eval_word(obs, params)


@dataclass(frozen=True)
class Mul:
    left: "PredicateExpr"
    right: "PredicateExpr"

    def eval(self, obs, params):
        return self.left.eval(obs, params) * self.right.eval(obs, params)

    def eval_word(self, obs, params):
        return self.left.eval_word(obs, params) * self.right.eval_word(obs, params)


@dataclass(frozen=True)
class AbsExpr:
    arg: "PredicateExpr"

    def eval(self, obs, params):
        return abs(self.arg.eval(obs, params))

    def eval_word(self, obs, params):
        return np.abs(self.arg.eval_word(obs, params))


@dataclass(frozen=True)
class MinExpr:
    args: tuple["PredicateExpr", ...]

    def eval(self, obs, params):
        return min(a.eval(obs, params) for a in self.args)

    def eval_word(self, obs, params):
        return np.minimum.reduce([a.eval_word(obs, params) for a in self.args])


@dataclass(frozen=True)
class MaxExpr:
    args: tuple["PredicateExpr", ...]

    def eval(self, obs, params):
        return max(a.eval(obs, params) for a in self.args)

    def eval_word(self, obs, params):
        return np.maximum.reduce([a.eval_word(obs, params) for a in self.args])


@dataclass(frozen=True)
class IndExpr:
    """Signed indicator: +1 when the argument is >= 0, -1 otherwise."""
    arg: "PredicateExpr"

    def eval(self, obs, params):
        return 1.0 if self.arg.eval(obs, params) >= 0 else -1.0

    def eval_word(self, obs, params):
        return np.where(self.arg.eval_word(obs, params) >= 0, 1.0, -1.0)


PredicateExpr = (
    Const | ObsComponent | ParamRef | Neg | Add | Sub | Mul
    | AbsExpr | MinExpr | MaxExpr | IndExpr
)


def obs_indices(e: PredicateExpr) -> set[int]:
    """All o[i] indices used by the expression."""
    match e:
        case ObsComponent(index=i):
            return {i}
        case Const() | ParamRef():
            return set()
        case Neg(arg=a) | AbsExpr(arg=a) | IndExpr(arg=a):
            return obs_indices(a)
        case Add(left=l, right=r) | Sub(left=l, right=r) | Mul(left=l, right=r):
            return obs_indices(l) | obs_indices(r)
        case MinExpr(args=args) | MaxExpr(args=args):
            out: set[int] = set()
            for a in args:
                out |= obs_indices(a)
            return out
    raise TypeError(f"not an expression node: {e!r}")


def param_names(e: PredicateExpr) -> set[str]:
    """All named parameters used by the expression."""
    match e:
        case ParamRef(name=n):
            return {n}
        case Const() | ObsComponent():
            return set()
        case Neg(arg=a) | AbsExpr(arg=a) | IndExpr(arg=a):
            return param_names(a)
        case Add(left=l, right=r) | Sub(left=l, right=r) | Mul(left=l, right=r):
            return param_names(l) | param_names(r)
        case MinExpr(args=args) | MaxExpr(args=args):
            out: set[str] = set()
            for a in args:
                out |= param_names(a)
            return out
    raise TypeError(f"not an expression node: {e!r}")


# --- spec file --------------------------------------------------------------

@dataclass(frozen=True)
class SpecFile:
    """A parsed TWTL specification: predicate table plus one formula."""
    obs_dim: int
    params: dict[str, float] = field(default_factory=dict)
    predicates: dict[str, PredicateExpr] = field(default_factory=dict)
    formula: Formula = None  # type: ignore[assignment]
