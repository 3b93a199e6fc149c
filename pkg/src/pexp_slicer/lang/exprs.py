"""Arithmetic and Boolean expressions over program variables.

Nodes are immutable and hash their structure once.  The smart constructors
(``add``, ``sub``, ``mul`` ...) fold closed subterms so that substitution
chains stay small; the raw classes are still usable directly.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass, fields
from fractions import Fraction
from typing import Callable, Mapping


class UnboundVariableError(KeyError):
    pass


class _Node:
    """Structural equality with a cached hash (trees are shared heavily)."""

    def _items(self):
        cls = type(self)
        names = cls.__dict__.get("_fnames")
        if names is None:
            names = tuple(f.name for f in fields(self))
            cls._fnames = names
        return tuple(getattr(self, n) for n in names)

    def __hash__(self):
        h = self.__dict__.get("_h")
        if h is None:
            h = hash((type(self).__name__,) + self._items())
            object.__setattr__(self, "_h", h)
        return h

    def __eq__(self, other):
        if self is other:
            return True
        if type(self) is not type(other) or hash(self) != hash(other):
            return False
        return self._items() == other._items()

    def __ne__(self, other):
        return not self == other


# ---------------------------------------------------------------- arithmetic


class ArithExpr(_Node):
    pass


@dataclass(frozen=True, eq=False)
class Num(ArithExpr):
    value: Fraction


@dataclass(frozen=True, eq=False)
class Var(ArithExpr):
    name: str


@dataclass(frozen=True, eq=False)
class Neg(ArithExpr):
    arg: ArithExpr


@dataclass(frozen=True, eq=False)
class Add(ArithExpr):
    left: ArithExpr
    right: ArithExpr


@dataclass(frozen=True, eq=False)
class Sub(ArithExpr):
    left: ArithExpr
    right: ArithExpr


@dataclass(frozen=True, eq=False)
class Mul(ArithExpr):
    left: ArithExpr
    right: ArithExpr


@dataclass(frozen=True, eq=False)
class Div(ArithExpr):
    left: ArithExpr
    right: ArithExpr


@dataclass(frozen=True, eq=False)
class Pow(ArithExpr):
    """Integer powers; the exponent must evaluate to an integer."""

    base: ArithExpr
    exp: ArithExpr


@dataclass(frozen=True, eq=False)
class Bracket(ArithExpr):
    """Iverson bracket used as a number (1 if the condition holds, else 0)."""

    cond: "BoolExpr"


# ------------------------------------------------------------------- boolean


class BoolExpr(_Node):
    pass


@dataclass(frozen=True, eq=False)
class BoolConst(BoolExpr):
    value: bool


@dataclass(frozen=True, eq=False)
class Cmp(BoolExpr):
    op: str
    left: ArithExpr
    right: ArithExpr


@dataclass(frozen=True, eq=False)
class And(BoolExpr):
    left: BoolExpr
    right: BoolExpr


@dataclass(frozen=True, eq=False)
class Or(BoolExpr):
    left: BoolExpr
    right: BoolExpr


@dataclass(frozen=True, eq=False)
class Not(BoolExpr):
    arg: BoolExpr


TRUE = BoolConst(True)
FALSE = BoolConst(False)

CMP_OPS: dict[str, Callable] = {
    "=": operator.eq,
    "!=": operator.ne,
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
}
NEGATED_CMP = {"=": "!=", "!=": "=", "<": ">=", ">=": "<", ">": "<=", "<=": ">"}


def _frac(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


def _power(base: Fraction, exp: Fraction) -> Fraction:
    if exp.denominator != 1:
        raise ValueError(f"non-integer exponent {exp}")
    if base == 0 and exp < 0:
        raise ZeroDivisionError("zero to a negative power")
    return base ** int(exp)


# ---------------------------------------------------------------- evaluation


def eval_arith(e: ArithExpr, s: Mapping[str, Fraction]) -> Fraction:
    t = type(e)
    if t is Num:
        return e.value
    if t is Var:
        try:
            return s[e.name]
        except KeyError:
            raise UnboundVariableError(e.name) from None
    if t is Add:
        return eval_arith(e.left, s) + eval_arith(e.right, s)
    if t is Sub:
        return eval_arith(e.left, s) - eval_arith(e.right, s)
    if t is Mul:
        return eval_arith(e.left, s) * eval_arith(e.right, s)
    if t is Div:
        return eval_arith(e.left, s) / eval_arith(e.right, s)
    if t is Neg:
        return -eval_arith(e.arg, s)
    if t is Pow:
        return _power(eval_arith(e.base, s), eval_arith(e.exp, s))
    if t is Bracket:
        return Fraction(1) if eval_bool(e.cond, s) else Fraction(0)
    raise TypeError(f"not an arithmetic expression: {e!r}")


def eval_bool(b: BoolExpr, s: Mapping[str, Fraction]) -> bool:
    t = type(b)
    if t is Cmp:
        return CMP_OPS[b.op](eval_arith(b.left, s), eval_arith(b.right, s))
    if t is And:
        return eval_bool(b.left, s) and eval_bool(b.right, s)
    if t is Or:
        return eval_bool(b.left, s) or eval_bool(b.right, s)
    if t is Not:
        return not eval_bool(b.arg, s)
    if t is BoolConst:
        return b.value
    raise TypeError(f"not a Boolean expression: {b!r}")


# -------------------------------------------------------- smart constructors


def num(v) -> Num:
    return Num(_frac(v))


def _closed(*es):
    return all(type(e) is Num for e in es)


def neg(a: ArithExpr) -> ArithExpr:
    if type(a) is Num:
        return Num(-a.value)
    if type(a) is Neg:
        return a.arg
    return Neg(a)


def add(a: ArithExpr, b: ArithExpr) -> ArithExpr:
    if _closed(a, b):
        return Num(a.value + b.value)
    if type(b) is Num and b.value == 0:
        return a
    if type(a) is Num and a.value == 0:
        return b
    return Add(a, b)


def sub(a: ArithExpr, b: ArithExpr) -> ArithExpr:
    if _closed(a, b):
        return Num(a.value - b.value)
    if type(b) is Num and b.value == 0:
        return a
    if type(a) is Num and a.value == 0:
        return neg(b)
    return Sub(a, b)


def mul(a: ArithExpr, b: ArithExpr) -> ArithExpr:
    if _closed(a, b):
        return Num(a.value * b.value)
    for x, y in ((a, b), (b, a)):
        if type(x) is Num:
            if x.value == 0:
                return Num(Fraction(0))
            if x.value == 1:
                return y
    return Mul(a, b)


def div(a: ArithExpr, b: ArithExpr) -> ArithExpr:
    if _closed(a, b) and b.value != 0:
        return Num(a.value / b.value)
    if type(b) is Num and b.value == 1:
        return a
    return Div(a, b)


def power(a: ArithExpr, b: ArithExpr) -> ArithExpr:
    if _closed(a, b):
        try:
            return Num(_power(a.value, b.value))
        except (ValueError, ZeroDivisionError):
            pass
    return Pow(a, b)


def bracket(c: BoolExpr) -> ArithExpr:
    if type(c) is BoolConst:
        return Num(Fraction(int(c.value)))
    return Bracket(c)


def cmp(op: str, a: ArithExpr, b: ArithExpr) -> BoolExpr:
    if _closed(a, b):
        return BoolConst(CMP_OPS[op](a.value, b.value))
    return Cmp(op, a, b)


def conj(a: BoolExpr, b: BoolExpr) -> BoolExpr:
    if type(a) is BoolConst:
        return b if a.value else FALSE
    if type(b) is BoolConst:
        return a if b.value else FALSE
    return And(a, b)


def disj(a: BoolExpr, b: BoolExpr) -> BoolExpr:
    if type(a) is BoolConst:
        return TRUE if a.value else b
    if type(b) is BoolConst:
        return TRUE if b.value else a
    return Or(a, b)


def negate(b: BoolExpr) -> BoolExpr:
    if type(b) is BoolConst:
        return BoolConst(not b.value)
    if type(b) is Not:
        return b.arg
    if type(b) is Cmp:
        return Cmp(NEGATED_CMP[b.op], b.left, b.right)
    return Not(b)


# -------------------------------------------------------------- substitution


def subst_arith(e: ArithExpr, x: str, E: ArithExpr, memo=None) -> ArithExpr:
    """e[x/E], folding closed subterms.  Returns ``e`` itself if x is absent."""
    if memo is None:
        memo = {}
    key = id(e)
    hit = memo.get(key)
    if hit is not None:
        return hit[1]
    t = type(e)
    if t is Num:
        r = e
    elif t is Var:
        r = E if e.name == x else e
    elif t is Neg:
        a = subst_arith(e.arg, x, E, memo)
        r = e if a is e.arg else neg(a)
    elif t is Bracket:
        c = subst_bool(e.cond, x, E, memo)
        r = e if c is e.cond else bracket(c)
    elif t is Pow:
        a = subst_arith(e.base, x, E, memo)
        b = subst_arith(e.exp, x, E, memo)
        r = e if (a is e.base and b is e.exp) else power(a, b)
    else:
        a = subst_arith(e.left, x, E, memo)
        b = subst_arith(e.right, x, E, memo)
        if a is e.left and b is e.right:
            r = e
        else:
            r = _BINARY[t](a, b)
    memo[key] = (e, r)  # keep e alive so id() stays unique
    return r


def subst_bool(b: BoolExpr, x: str, E: ArithExpr, memo=None) -> BoolExpr:
    if memo is None:
        memo = {}
    key = id(b)
    hit = memo.get(key)
    if hit is not None:
        return hit[1]
    t = type(b)
    if t is BoolConst:
        r = b
    elif t is Cmp:
        l = subst_arith(b.left, x, E, memo)
        rr = subst_arith(b.right, x, E, memo)
        r = b if (l is b.left and rr is b.right) else cmp(b.op, l, rr)
    elif t is Not:
        a = subst_bool(b.arg, x, E, memo)
        r = b if a is b.arg else negate(a)
    else:
        l = subst_bool(b.left, x, E, memo)
        rr = subst_bool(b.right, x, E, memo)
        if l is b.left and rr is b.right:
            r = b
        else:
            r = (conj if t is And else disj)(l, rr)
    memo[key] = (b, r)
    return r


_BINARY = {Add: add, Sub: sub, Mul: mul, Div: div}


# ---------------------------------------------------------------- free vars


def arith_vars(e: ArithExpr) -> frozenset[str]:
    cached = e.__dict__.get("_fv")
    if cached is not None:
        return cached
    t = type(e)
    if t is Num:
        r = frozenset()
    elif t is Var:
        r = frozenset((e.name,))
    elif t is Neg:
        r = arith_vars(e.arg)
    elif t is Bracket:
        r = bool_vars(e.cond)
    elif t is Pow:
        r = arith_vars(e.base) | arith_vars(e.exp)
    else:
        r = arith_vars(e.left) | arith_vars(e.right)
    object.__setattr__(e, "_fv", r)
    return r


def bool_vars(b: BoolExpr) -> frozenset[str]:
    cached = b.__dict__.get("_fv")
    if cached is not None:
        return cached
    t = type(b)
    if t is BoolConst:
        r = frozenset()
    elif t is Cmp:
        r = arith_vars(b.left) | arith_vars(b.right)
    elif t is Not:
        r = bool_vars(b.arg)
    else:
        r = bool_vars(b.left) | bool_vars(b.right)
    object.__setattr__(b, "_fv", r)
    return r


# ---------------------------------------------------------------- printing
#
# Precedence levels: 1 sum, 2 product, 3 unary, 4 power, 5 atom.  A child
# gets parentheses when its level is below what its position requires.

_ARITH_LEVEL = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4}


def format_fraction(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def _level(e: ArithExpr) -> int:
    t = type(e)
    if t is Num:
        if e.value.denominator != 1:
            return 2
        return 5 if e.value >= 0 else 3
    return _ARITH_LEVEL.get(t, 5)


def _wrap(e: ArithExpr, need: int) -> str:
    s = format_arith(e)
    return f"({s})" if _level(e) < need else s


def format_arith(e: ArithExpr) -> str:
    t = type(e)
    if t is Num:
        return format_fraction(e.value)
    if t is Var:
        return e.name
    if t is Bracket:
        return f"[{format_bool(e.cond)}]"
    if t is Neg:
        return "-" + _wrap(e.arg, 3)
    if t is Pow:
        return _wrap(e.base, 5) + "^" + _wrap(e.exp, 3)
    if t in (Add, Sub):
        op = " + " if t is Add else " - "
        return _wrap(e.left, 1) + op + _wrap(e.right, 2)
    op = "*" if t is Mul else "/"
    return _wrap(e.left, 2) + op + _wrap(e.right, 3)


_BOOL_LEVEL = {Or: 1, And: 2, Not: 3}


def _bwrap(b: BoolExpr, need: int) -> str:
    s = format_bool(b)
    return f"({s})" if _BOOL_LEVEL.get(type(b), 4) < need else s


def format_bool(b: BoolExpr) -> str:
    t = type(b)
    if t is BoolConst:
        return "true" if b.value else "false"
    if t is Cmp:
        return f"{format_arith(b.left)} {b.op} {format_arith(b.right)}"
    if t is Not:
        return "!" + _bwrap(b.arg, 3)
    if t is And:
        return _bwrap(b.left, 2) + " && " + _bwrap(b.right, 3)
    return _bwrap(b.left, 1) + " || " + _bwrap(b.right, 2)
