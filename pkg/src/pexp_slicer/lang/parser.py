"""Concrete syntax.

A program file has three sections::

    domains { y in {-1, 0, 1}; n in {0..3}; }
    spec partial pre{ 1/2 * [y*y <= 1/2] } post{ [x >= 0] }
    program {
      x := 3/2 - y*y;
      { x := x - 1 } [1/2] { x := x - 2 };
      while (x > 0) @invariant{ [x >= 0] } do { x := x - 1 }
    }

Loops carry ``@invariant{E}`` and, for total correctness, ``@terminates{B}
@variant{A} @bounds{l, u} @eps{q}``.  ``if`` without ``else`` means
``else { skip }``; ``else if`` chains nest.
"""

from __future__ import annotations

import re
from enum import Enum
from fractions import Fraction
from typing import NamedTuple

from lark import Lark, Transformer, v_args
from lark.exceptions import UnexpectedInput, VisitError

from . import exprs as X
from .state import StateSpace, VarDomain
from .syntax import Assign, Cond, PChoice, Prog, Skip, TotalLoopAnnotation, While, loops


class Mode(str, Enum):
    PARTIAL = "partial"
    TOTAL = "total"


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = f" at line {line}, column {column}" if line is not None else ""
        super().__init__(f"{message}{where}")
        self.line = line
        self.column = column


GRAMMAR = r"""
start: domains spec program

domains: "domains" "{" (domain ";"?)* "}"
domain: NAME "in" "{" dvalue ("," dvalue)* "}"
dvalue: arith                       -> dconst
      | SIGNED_INT ".." SIGNED_INT  -> drange

spec: "spec" MODE "pre" "{" arith "}" "post" "{" arith "}"
MODE: "partial" | "total"

program: "program" "{" prog "}"

prog: (inst ";"?)+
?inst: "skip"                                   -> skip
     | NAME ":=" arith                          -> assign
     | cond
     | block "[" arith "]" block                -> pchoice
     | "while" "(" bexpr ")" annotation* "do" block -> loop
cond: "if" "(" bexpr ")" block ("else" (block | cond))?
block: "{" prog "}"

annotation: "@invariant" "{" arith "}"          -> ann_inv
          | "@terminates" "{" bexpr "}"         -> ann_term
          | "@variant" "{" arith "}"            -> ann_variant
          | "@bounds" "{" arith "," arith "}"   -> ann_bounds
          | "@eps" "{" arith "}"                -> ann_eps

?arith: sum
?sum: product
    | sum "+" product   -> add
    | sum "-" product   -> sub
?product: unary
    | product "*" unary -> mul
    | product "/" unary -> div
?unary: power
    | "-" unary         -> neg
?power: atom
    | atom "^" unary    -> pow
?atom: NUMBER           -> number
     | NAME             -> var
     | "(" arith ")"
     | "[" bexpr "]"    -> bracket

?bexpr: disj
?disj: conj
     | disj ("||" | "or") conj     -> b_or
?conj: bneg
     | conj ("&&" | "and") bneg    -> b_and
?bneg: batom
     | ("!" | "not") bneg          -> b_not
?batom: arith CMPOP arith          -> b_cmp
      | "true"                     -> b_true
      | "false"                    -> b_false
      | "(" bexpr ")"

CMPOP: "<=" | ">=" | "!=" | "==" | "=" | "<" | ">" | "≤" | "≥" | "≠"
NAME: /(?!(true|false|skip|if|else|while|do|and|or|not|in|domains|spec|program|pre|post)\b)[A-Za-z_][A-Za-z0-9_]*/
NUMBER: /\d+(\.\d+)?/

COMMENT: /#[^\n]*/
%import common.SIGNED_INT
%import common.WS
%ignore WS
%ignore COMMENT
"""

_CMP_ALIASES = {"==": "=", "≤": "<=", "≥": ">=", "≠": "!="}


def _const(a: X.ArithExpr, what: str) -> Fraction:
    if type(a) is not X.Num:
        raise ValueError(f"{what} must be a constant, got {X.format_arith(a)}")
    return a.value


def _int(a: X.ArithExpr, what: str) -> int:
    q = _const(a, what)
    if q.denominator != 1:
        raise ValueError(f"{what} must be an integer, got {X.format_fraction(q)}")
    return int(q)


@v_args(inline=True)
class _Build(Transformer):
    # arithmetic
    def number(self, tok):
        return X.Num(Fraction(str(tok)))

    def var(self, tok):
        return X.Var(str(tok))

    add = staticmethod(X.add)
    sub = staticmethod(X.sub)
    mul = staticmethod(X.mul)
    div = staticmethod(X.div)
    pow = staticmethod(X.power)
    neg = staticmethod(X.neg)
    bracket = staticmethod(X.bracket)

    # boolean
    def b_cmp(self, a, op, b):
        op = str(op)
        return X.cmp(_CMP_ALIASES.get(op, op), a, b)

    def b_and(self, a, b):
        return X.conj(a, b)

    def b_or(self, a, b):
        return X.disj(a, b)

    def b_not(self, a):
        return X.negate(a)

    def b_true(self):
        return X.TRUE

    def b_false(self):
        return X.FALSE

    # instructions
    def skip(self):
        return Skip()

    def assign(self, name, e):
        return Assign(str(name), e)

    def block(self, p):
        return p

    def prog(self, *insts):
        return Prog(tuple(insts))

    def cond(self, g, then, orelse=None):
        if orelse is None:
            orelse = Prog((Skip(),))
        elif isinstance(orelse, Cond):
            orelse = Prog((orelse,))
        return Cond(g, then, orelse)

    def pchoice(self, left, p, right):
        return PChoice(left, _const(p, "choice probability"), right)

    def ann_inv(self, e):
        return ("invariant", e)

    def ann_term(self, b):
        return ("terminates", b)

    def ann_variant(self, a):
        return ("variant", a)

    def ann_bounds(self, lo, hi):
        return ("bounds", (_int(lo, "lower bound"), _int(hi, "upper bound")))

    def ann_eps(self, q):
        return ("eps", _const(q, "eps"))

    def loop(self, g, *rest):
        body = rest[-1]
        anns = {}
        for key, val in rest[:-1]:
            if key in anns:
                raise ValueError(f"duplicate @{key} annotation")
            anns[key] = val
        if "invariant" not in anns:
            raise ValueError("loop is missing its @invariant annotation")
        total_keys = {"terminates", "variant", "bounds", "eps"}
        given = total_keys & anns.keys()
        total = None
        if given:
            if given != total_keys:
                missing = ", ".join(f"@{k}" for k in sorted(total_keys - given))
                raise ValueError(f"incomplete total-correctness annotation, missing {missing}")
            lo, hi = anns["bounds"]
            total = TotalLoopAnnotation(anns["terminates"], anns["variant"], lo, hi, anns["eps"])
        return While(g, _expectation(anns["invariant"]), total, body)

    # header
    def dconst(self, a):
        return [_const(a, "domain value")]

    def drange(self, lo, hi):
        lo, hi = int(lo), int(hi)
        if lo > hi:
            raise ValueError(f"empty range {lo}..{hi}")
        return [Fraction(v) for v in range(lo, hi + 1)]

    def domain(self, name, *vals):
        values = [v for chunk in vals for v in chunk]
        return VarDomain(str(name), tuple(values))

    def domains(self, *doms):
        return StateSpace(list(doms))

    def spec(self, mode, pre, post):
        return Mode(str(mode)), _expectation(pre), _expectation(post)

    def program(self, p):
        return p


def _expectation(a):
    from ..expectation import arith

    return arith(a)


_parsers: dict = {}


def _parser(start: str) -> Lark:
    p = _parsers.get(start)
    if p is None:
        p = Lark(GRAMMAR, start=start, parser="earley", propagate_positions=False)
        _parsers[start] = p
    return p


def _run(text: str, start: str):
    try:
        tree = _parser(start).parse(text)
    except UnexpectedInput as exc:
        line = getattr(exc, "line", None)
        col = getattr(exc, "column", None)
        if line is not None and line < 0:
            line = col = None
        raise ParseError("syntax error: " + str(exc).strip().splitlines()[0], line, col) from None
    try:
        return _Build().transform(tree)
    except VisitError as exc:
        raise ParseError(str(exc.orig_exc)) from exc.orig_exc


class ParseResult(NamedTuple):
    prog: Prog
    space: StateSpace
    spec: tuple  # (pre, post)
    mode: Mode


def parse_program(source: str) -> ParseResult:
    """Parse a complete program file (domains, spec and program)."""
    tree = _run(source, "start")
    space, (mode, pre, post), p = tree.children
    _check_declared(source, space, p, pre, post)
    if mode is Mode.TOTAL:
        for w in loops(p):
            if w.total is None:
                raise ParseError("total mode: loop " + _loop_head(w) + " lacks @terminates/@variant/@bounds/@eps")
    _check_variants(p, space)
    return ParseResult(p, space, (pre, post), mode)


def parse_prog(text: str) -> Prog:
    """Parse a bare instruction sequence."""
    return _run(text, "prog")


def parse_arith(text: str) -> X.ArithExpr:
    return _run(text, "arith")


def parse_bool(text: str) -> X.BoolExpr:
    return _run(text, "bexpr")


def parse_expectation(text: str):
    return _expectation(parse_arith(text))


def _loop_head(w: While) -> str:
    return f"while ({X.format_bool(w.guard)})"


def program_vars(p: Prog) -> set[str]:
    from ..expectation import free_vars

    out: set[str] = set()
    for i in p:
        if isinstance(i, Assign):
            out.add(i.var)
            out |= X.arith_vars(i.expr)
        elif isinstance(i, Cond):
            out |= X.bool_vars(i.guard) | program_vars(i.then) | program_vars(i.orelse)
        elif isinstance(i, PChoice):
            out |= program_vars(i.left) | program_vars(i.right)
        elif isinstance(i, While):
            out |= X.bool_vars(i.guard) | free_vars(i.invariant) | program_vars(i.body)
            if i.total is not None:
                out |= X.bool_vars(i.total.term) | X.arith_vars(i.total.variant)
    return out


def _check_declared(source, space, p, pre, post):
    from ..expectation import free_vars

    used = program_vars(p) | free_vars(pre) | free_vars(post)
    undeclared = sorted(used - set(space.domains))
    if undeclared:
        name = undeclared[0]
        line = col = None
        body_start = source.find("spec")
        m = re.compile(rf"\b{re.escape(name)}\b").search(source, max(body_start, 0))
        if m:
            line = source.count("\n", 0, m.start()) + 1
            col = m.start() - (source.rfind("\n", 0, m.start()) + 1) + 1
        raise ParseError(f"undeclared variable {name}", line, col)


def _check_variants(p, space):
    for w in loops(p):
        if w.total is None:
            continue
        for s in space.enumerate():
            v = X.eval_arith(w.total.variant, s)
            if v.denominator != 1:
                raise ParseError(
                    f"variant of {_loop_head(w)} is not an integer at {dict(s)}: {X.format_fraction(v)}"
                )
