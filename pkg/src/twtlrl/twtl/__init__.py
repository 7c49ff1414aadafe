from .ast import (
    TRUE, Concat, Disj, Formula, Hold, PredicateExpr, SpecFile, Within,
    propositions,
)
from .parser import (
    SpecError, expr_to_str, formula_to_str, parse_formula, parse_pred_expr,
    parse_spec, spec_to_text,
)
from .semantics import (
    ObservationWord, check_feasibility, concrete_reward, eval_predicate,
    robustness, satisfies, time_horizon,
)

__all__ = [
    "TRUE", "Concat", "Disj", "Formula", "Hold", "PredicateExpr", "SpecFile",
    "Within", "propositions", "SpecError", "expr_to_str", "formula_to_str",
    "parse_formula", "parse_pred_expr", "parse_spec", "spec_to_text",
    "ObservationWord", "check_feasibility", "concrete_reward",
    "eval_predicate", "robustness", "satisfies", "time_horizon",
]
