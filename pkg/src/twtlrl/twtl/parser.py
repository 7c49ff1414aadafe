"""Recursive-descent parser for TWTL spec files.

Spec file format (line oriented, ``#`` starts a comment):

    obs_dim <int>
    param <name> = <float>          # zero or more
    pred <name> := <expr>           # one or more
    formula := <twtl formula>

Formula grammar (disjunction binds loosest, both operators left-associative):

    formula   := concatseq ("|" concatseq)*
    concatseq := primary ("." primary)*
    primary   := "H^" INT (IDENT | "T") | "[" formula "]^[" INT "," INT "]"
               | "(" formula ")"

Expression grammar:

    expr   := term (("+" | "-") term)*
    term   := factor ("*" factor)*
    factor := "-" factor | atom
    atom   := NUMBER | IDENT | "o[" INT "]" | "(" expr ")"
            | ("abs" | "ind") "(" expr ")"
            | ("min" | "max") "(" expr ("," expr)* ")"
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .ast import (
    TRUE, Add, AbsExpr, Concat, Const, Disj, Formula, Hold, IndExpr,
    MaxExpr, MinExpr, Mul, Neg, ObsComponent, ParamRef, PredicateExpr,
    SpecFile, Sub, Within, obs_indices, param_names, propositions,
)
from .semantics import infeasible_within_nodes, time_horizon

__all__ = ["SpecError", "parse_spec", "parse_formula", "parse_pred_expr",
           "formula_to_str", "expr_to_str", "spec_to_text"]


class SpecError(ValueError):
    """Parse or validation failure, with a 1-based source position."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line = line
        self.col = col
        where = f" (line {line}, col {col})" if line else ""
        super().__init__(f"{message}{where}")


# --- tokenizer --------------------------------------------------------------

@dataclass(frozen=True)
class _Tok:
    kind: str   # NUM INT IDENT OP EOF
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"\s+"
    r"|(?P<num>\d+\.\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?|\d+[eE][-+]?\d+)"
    r"|(?P<int>\d+)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\^\[|\]\^\[|:=|[][()^.,|*+=-])"
)


def _tokenize(text: str, line: int) -> list[_Tok]:
    toks: list[_Tok] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise SpecError(f"unexpected character {text[pos]!r}", line, pos + 1)
        if m.lastgroup == "num":
            toks.append(_Tok("NUM", m.group(), line, pos + 1))
        elif m.lastgroup == "int":
            toks.append(_Tok("INT", m.group(), line, pos + 1))
        elif m.lastgroup == "ident":
            toks.append(_Tok("IDENT", m.group(), line, pos + 1))
        elif m.lastgroup == "op":
            toks.append(_Tok("OP", m.group(), line, pos + 1))
        pos = m.end()
    toks.append(_Tok("EOF", "", line, len(text) + 1))
    return toks


class _Stream:
    def __init__(self, toks: list[_Tok]):
        self.toks = toks
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        t = self.toks[self.i]
        if t.kind != "EOF":
            self.i += 1
        return t

    def expect(self, kind: str, text: str | None = None) -> _Tok:
        t = self.peek()
        if t.kind != kind or (text is not None and t.text != text):
            want = text if text is not None else kind
            raise SpecError(f"expected {want!r}, got {t.text or 'end of line'!r}",
                            t.line, t.col)
        return self.next()

    def at_op(self, text: str) -> bool:
        t = self.peek()
        return t.kind == "OP" and t.text == text


# --- formula grammar --------------------------------------------------------

def _parse_formula(s: _Stream) -> Formula:
    f = _parse_concatseq(s)
    while s.at_op("|"):
        s.next()
        f = Disj(f, _parse_concatseq(s))
    return f


def _parse_concatseq(s: _Stream) -> Formula:
    f = _parse_primary(s)
    while s.at_op("."):
        s.next()
        f = Concat(f, _parse_primary(s))
    return f


def _parse_primary(s: _Stream) -> Formula:
    t = s.peek()
    if t.kind == "IDENT" and t.text == "H":
        s.next()
        s.expect("OP", "^")
        d = int(s.expect("INT").text)
        target = s.expect("IDENT").text
        return Hold(d, TRUE if target == TRUE else target)
    if s.at_op("["):
        s.next()
        inner = _parse_formula(s)
        s.expect("OP", "]^[")
        a = int(s.expect("INT").text)
        s.expect("OP", ",")
        b_tok = s.peek()
        b = int(s.expect("INT").text)
        s.expect("OP", "]")
        if a > b:
            raise SpecError(f"within window [{a},{b}] has a > b", b_tok.line, b_tok.col)
        return Within(inner, a, b)
    if s.at_op("("):
        s.next()
        f = _parse_formula(s)
        s.expect("OP", ")")
        return f
    raise SpecError(f"expected 'H^', '[' or '(', got {t.text or 'end of line'!r}",
                    t.line, t.col)


def parse_formula(text: str, line: int = 1) -> Formula:
    s = _Stream(_tokenize(text, line))
    f = _parse_formula(s)
    t = s.peek()
    if t.kind != "EOF":
        raise SpecError(f"trailing input {t.text!r}", t.line, t.col)
    return f


# --- expression grammar -----------------------------------------------------

def _parse_expr(s: _Stream) -> PredicateExpr:
    e = _parse_term(s)
    while s.at_op("+") or s.at_op("-"):
        op = s.next().text
        rhs = _parse_term(s)
        e = Add(e, rhs) if op == "+" else Sub(e, rhs)
    return e


def _parse_term(s: _Stream) -> PredicateExpr:
    e = _parse_factor(s)
    while s.at_op("*"):
        s.next()
        e = Mul(e, _parse_factor(s))
    return e


def _parse_factor(s: _Stream) -> PredicateExpr:
    if s.at_op("-"):
        s.next()
        return Neg(_parse_factor(s))
    return _parse_atom(s)


def _parse_atom(s: _Stream) -> PredicateExpr:
    t = s.peek()
    if t.kind in ("NUM", "INT"):
        s.next()
        return Const(float(t.text))
    if t.kind == "IDENT":
        name = s.next().text
        if name == "o":
            s.expect("OP", "[")
            idx = int(s.expect("INT").text)
            s.expect("OP", "]")
            return ObsComponent(idx)
        if name in ("abs", "ind"):
            s.expect("OP", "(")
            arg = _parse_expr(s)
            s.expect("OP", ")")
            return AbsExpr(arg) if name == "abs" else IndExpr(arg)
        if name in ("min", "max"):
            s.expect("OP", "(")
            args = [_parse_expr(s)]
            while s.at_op(","):
                s.next()
                args.append(_parse_expr(s))
            s.expect("OP", ")")
            return MinExpr(tuple(args)) if name == "min" else MaxExpr(tuple(args))
        return ParamRef(name)
    if s.at_op("("):
        s.next()
        e = _parse_expr(s)
        s.expect("OP", ")")
        return e
    raise SpecError(f"expected expression, got {t.text or 'end of line'!r}",
                    t.line, t.col)


def parse_pred_expr(text: str, line: int = 1) -> PredicateExpr:
    s = _Stream(_tokenize(text, line))
    e = _parse_expr(s)
    t = s.peek()
    if t.kind != "EOF":
        raise SpecError(f"trailing input {t.text!r}", t.line, t.col)
    return e


# --- spec files -------------------------------------------------------------

def parse_spec(text: str) -> SpecFile:
    """Parse and validate a full spec file.

    Raises SpecError on syntax errors, unknown propositions, unbound
    parameters, out-of-range observation indices, and infeasible formulas.
    """
    obs_dim: int | None = None
    params: dict[str, float] = {}
    predicates: dict[str, PredicateExpr] = {}
    formula: Formula | None = None
    formula_line = 0

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("obs_dim"):
            rest = line[len("obs_dim"):].strip()
            try:
                obs_dim = int(rest)
            except ValueError:
                raise SpecError(f"bad obs_dim value {rest!r}", lineno, 1) from None
            if obs_dim <= 0:
                raise SpecError("obs_dim must be positive", lineno, 1)
        elif line.startswith("param "):
            name, _, val = line[len("param "):].partition("=")
            name = name.strip()
            if not name or not val.strip():
                raise SpecError("malformed param line", lineno, 1)
            try:
                params[name] = float(val)
            except ValueError:
                raise SpecError(f"bad param value {val.strip()!r}", lineno, 1) from None
        elif line.startswith("pred "):
            name, sep, expr_text = line[len("pred "):].partition(":=")
            name = name.strip()
            if not sep or not name:
                raise SpecError("malformed pred line (expected 'pred name := expr')",
                                lineno, 1)
            predicates[name] = parse_pred_expr(expr_text, lineno)
        elif line.startswith("formula"):
            _, sep, ftext = line.partition(":=")
            if not sep:
                raise SpecError("malformed formula line (expected 'formula := ...')",
                                lineno, 1)
            formula = parse_formula(ftext, lineno)
            formula_line = lineno
        else:
            raise SpecError(f"unrecognized directive {line.split()[0]!r}", lineno, 1)

    if obs_dim is None:
        raise SpecError("missing obs_dim")
    if formula is None:
        raise SpecError("missing formula")

    for name, expr in predicates.items():
        for p in sorted(param_names(expr)):
            if p not in params:
                raise SpecError(f"predicate {name!r} uses unbound parameter {p!r}")
        for i in sorted(obs_indices(expr)):
            if not 0 <= i < obs_dim:
                raise SpecError(
                    f"predicate {name!r} uses o[{i}] outside obs_dim {obs_dim}")
    for ap in sorted(propositions(formula)):
        if ap not in predicates:
            raise SpecError(f"unknown proposition {ap!r}", formula_line, 1)

    bad = infeasible_within_nodes(formula)
    if bad:
        descr = ", ".join(
            f"[...]^[{w.lo},{w.hi}] needs window >= {time_horizon(w.inner)}"
            for w in bad)
        raise SpecError(f"infeasible formula: {descr}", formula_line, 1)

    return SpecFile(obs_dim=obs_dim, params=params, predicates=predicates,
                    formula=formula)


# --- pretty printing --------------------------------------------------------

def formula_to_str(f: Formula) -> str:
    match f:
        case Hold(d, target):
            return f"H^{d} {target}"
        case Concat(left, right):
            ls = formula_to_str(left)
            rs = formula_to_str(right)
            if isinstance(left, Disj):
                ls = f"({ls})"
            if isinstance(right, (Disj, Concat)):  # keep left-associativity
                rs = f"({rs})"
            return f"{ls} . {rs}"
        case Disj(left, right):
            rs = formula_to_str(right)
            if isinstance(right, Disj):
                rs = f"({rs})"
            return f"{formula_to_str(left)} | {rs}"
        case Within(inner, a, b):
            return f"[{formula_to_str(inner)}]^[{a},{b}]"
    raise TypeError(f"not a formula node: {f!r}")


def _num_to_str(v: float) -> str:
    return repr(int(v)) if float(v).is_integer() and abs(v) < 1e15 else repr(v)


def expr_to_str(e: PredicateExpr, parent_prec: int = 0) -> str:
    # precedence: 1 add/sub, 2 mul, 3 unary/atom
    match e:
        case Const(v):
            s, prec = _num_to_str(v), 3
        case ObsComponent(i):
            s, prec = f"o[{i}]", 3
        case ParamRef(n):
            s, prec = n, 3
        case Neg(a):
            s, prec = f"-{expr_to_str(a, 3)}", 2
        case Add(l, r):
            s, prec = f"{expr_to_str(l, 1)} + {expr_to_str(r, 2)}", 1
        case Sub(l, r):
            s, prec = f"{expr_to_str(l, 1)} - {expr_to_str(r, 2)}", 1
        case Mul(l, r):
            s, prec = f"{expr_to_str(l, 2)} * {expr_to_str(r, 3)}", 2
        case AbsExpr(a):
            s, prec = f"abs({expr_to_str(a)})", 3
        case IndExpr(a):
            s, prec = f"ind({expr_to_str(a)})", 3
        case MinExpr(args):
            s, prec = "min(" + ", ".join(expr_to_str(a) for a in args) + ")", 3
        case MaxExpr(args):
            s, prec = "max(" + ", ".join(expr_to_str(a) for a in args) + ")", 3
        case _:
            raise TypeError(f"not an expression node: {e!r}")
    return f"({s})" if prec < parent_prec else s


def spec_to_text(spec: SpecFile) -> str:
    lines = [f"obs_dim {spec.obs_dim}"]
    for name, val in spec.params.items():
        lines.append(f"param {name} = {repr(float(val))}")
    for name, expr in spec.predicates.items():
        lines.append(f"pred {name} := {expr_to_str(expr)}")
    lines.append(f"formula := {formula_to_str(spec.formula)}")
    return "\n".join(lines) + "\n"
