"""Symbolic expectations: maps from states to [0, 1].

Trees are built through smart constructors (``const``, ``iverson``, ``add``,
``scale``, ``mul``, ``arith``) which fold constants and merge like terms.
Substitution is eager, so no substitution node ever appears in a tree.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .lang import exprs as X
from .lang.exprs import ArithExpr, BoolExpr, _Node, format_arith, format_bool, format_fraction


class ExpectationRangeError(ValueError):
    def __init__(self, state, value):
        super().__init__(f"expectation value {format_fraction(value)} outside [0,1] at {dict(state)}")
        self.state = state
        self.value = value


class Expectation(_Node):
    pass


@dataclass(frozen=True, eq=False)
class Const(Expectation):
    value: Fraction


@dataclass(frozen=True, eq=False)
class Iverson(Expectation):
    cond: BoolExpr


@dataclass(frozen=True, eq=False)
class Arith(Expectation):
    """An arithmetic leaf such as ``2^(n - K)`` or a bare variable."""

    expr: ArithExpr


@dataclass(frozen=True, eq=False)
class Sum(Expectation):
    terms: tuple


@dataclass(frozen=True, eq=False)
class Scale(Expectation):
    factor: Fraction
    body: Expectation


@dataclass(frozen=True, eq=False)
class Product(Expectation):
    """Pointwise product, e.g. a guard times an invariant."""

    left: Expectation
    right: Expectation


ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))


# -------------------------------------------------------- smart constructors


def const(q) -> Const:
    return Const(Fraction(q))


def iverson(b: BoolExpr) -> Expectation:
    if not X.bool_vars(b):
        return ONE if X.eval_bool(b, {}) else ZERO
    return Iverson(b)


def scale(q, e: Expectation) -> Expectation:
    q = Fraction(q)
    if q == 0:
        return ZERO
    if q == 1:
        return e
    t = type(e)
    if t is Const:
        return Const(q * e.value)
    if t is Scale:
        return scale(q * e.factor, e.body)
    return Scale(q, e)


def _split(e: Expectation):
    if type(e) is Scale:
        return e.factor, e.body
    return Fraction(1), e


def add(*terms: Expectation) -> Expectation:
    flat = []
    for t in terms:
        if type(t) is Sum:
            flat.extend(t.terms)
        else:
            flat.append(t)
    coeffs: dict = {}
    order = []
    constant = None
    for t in flat:
        if type(t) is Const:
            constant = t.value if constant is None else constant + t.value
            if "const" not in coeffs:
                coeffs["const"] = None
                order.append("const")
            continue
        q, body = _split(t)
        if body in coeffs:
            coeffs[body] += q
        else:
            coeffs[body] = q
            order.append(body)
    out = []
    for key in order:
        if key == "const":
            if constant:
                out.append(Const(constant))
        else:
            q = coeffs[key]
            if q:
                out.append(scale(q, key))
    if not out:
        return ZERO
    if len(out) == 1:
        return out[0]
    return Sum(tuple(out))


def sub(a: Expectation, b: Expectation) -> Expectation:
    return add(a, scale(-1, b))


def mul(a: Expectation, b: Expectation) -> Expectation:
    if type(a) is Const:
        return scale(a.value, b)
    if type(b) is Const:
        return scale(b.value, a)
    qa, a = _split(a)
    qb, b = _split(b)
    if type(a) is Iverson and type(b) is Iverson:
        if a.cond == b.cond:
            body = a
        else:
            body = Iverson(X.conj(a.cond, b.cond))
    else:
        body = Product(a, b)
    return scale(qa * qb, body)


def guard(b: BoolExpr, e: Expectation) -> Expectation:
    """[b] * e"""
    return mul(iverson(b), e)


def arith(a: ArithExpr) -> Expectation:
    """Canonical expectation for an arithmetic expression.

    Sums, differences, products, negations, constants and brackets map onto
    the corresponding expectation nodes; everything else stays a leaf.
    """
    t = type(a)
    if t is X.Num:
        return Const(a.value)
    if t is X.Bracket:
        return iverson(a.cond)
    if t is X.Add:
        return add(arith(a.left), arith(a.right))
    if t is X.Sub:
        return sub(arith(a.left), arith(a.right))
    if t is X.Mul:
        return mul(arith(a.left), arith(a.right))
    if t is X.Neg:
        return scale(-1, arith(a.arg))
    if t is X.Div and type(a.right) is X.Num and a.right.value != 0:
        return scale(1 / a.right.value, arith(a.left))
    return Arith(a)


# ------------------------------------------------------------- substitution


def substitute(e: Expectation, x: str, E: ArithExpr, _memo=None) -> Expectation:
    """e[x/E]; shares unchanged subtrees and returns ``e`` if x is not free."""
    if x not in free_vars(e):
        return e
    memo = {} if _memo is None else _memo
    key = id(e)
    hit = memo.get(key)
    if hit is not None:
        return hit[1]
    t = type(e)
    if t is Iverson:
        r = iverson(X.subst_bool(e.cond, x, E, memo))
    elif t is Arith:
        r = arith(X.subst_arith(e.expr, x, E, memo))
    elif t is Sum:
        r = add(*(substitute(s, x, E, memo) for s in e.terms))
    elif t is Scale:
        r = scale(e.factor, substitute(e.body, x, E, memo))
    elif t is Product:
        r = mul(substitute(e.left, x, E, memo), substitute(e.right, x, E, memo))
    else:
        r = e
    memo[key] = (e, r)
    return r


def free_vars(e: Expectation) -> frozenset[str]:
    cached = e.__dict__.get("_fv")
    if cached is not None:
        return cached
    t = type(e)
    if t is Const:
        r = frozenset()
    elif t is Iverson:
        r = X.bool_vars(e.cond)
    elif t is Arith:
        r = X.arith_vars(e.expr)
    elif t is Sum:
        r = frozenset().union(*(free_vars(s) for s in e.terms))
    elif t is Scale:
        r = free_vars(e.body)
    else:
        r = free_vars(e.left) | free_vars(e.right)
    object.__setattr__(e, "_fv", r)
    return r


def size(e: Expectation) -> int:
    """Number of distinct nodes (the tree is a DAG)."""
    seen = set()
    stack = [e]
    while stack:
        n = stack.pop()
        if id(n) in seen:
            continue
        seen.add(id(n))
        t = type(n)
        if t is Sum:
            stack.extend(n.terms)
        elif t is Scale:
            stack.append(n.body)
        elif t is Product:
            stack.extend((n.left, n.right))
    return len(seen)


# --------------------------------------------------------------- evaluation


def _value(e: Expectation, s: Mapping[str, Fraction], memo: dict) -> Fraction:
    t = type(e)
    if t is Const:
        return e.value
    key = id(e)
    v = memo.get(key)
    if v is not None:
        return v
    if t is Iverson:
        v = Fraction(1) if X.eval_bool(e.cond, s) else Fraction(0)
    elif t is Sum:
        v = sum((_value(a, s, memo) for a in e.terms), Fraction(0))
    elif t is Scale:
        v = e.factor * _value(e.body, s, memo)
    elif t is Product:
        v = _value(e.left, s, memo)
        if v:
            v = v * _value(e.right, s, memo)
    elif t is Arith:
        v = X.eval_arith(e.expr, s)
    else:
        raise TypeError(f"not an expectation: {e!r}")
    memo[key] = v
    return v


def evaluate(e: Expectation, s: Mapping[str, Fraction], check_range: bool = True) -> Fraction:
    v = _value(e, s, {})
    if check_range and not (0 <= v <= 1):
        raise ExpectationRangeError(s, v)
    return v


def simplify(e: Expectation) -> Expectation:
    """Rebuild through the smart constructors (constant folding, merging)."""
    t = type(e)
    if t is Iverson:
        return iverson(e.cond)
    if t is Arith:
        return arith(e.expr)
    if t is Sum:
        return add(*(simplify(a) for a in e.terms))
    if t is Scale:
        return scale(e.factor, simplify(e.body))
    if t is Product:
        return mul(simplify(e.left), simplify(e.right))
    return e


# ---------------------------------------------------------------- entailment


@dataclass(frozen=True)
class LogicalBinding:
    """A logical variable quantified over a finite integer range."""

    var: str
    range: tuple

    def __post_init__(self):
        if not self.range:
            raise ValueError(f"empty range for logical variable {self.var}")
        object.__setattr__(self, "range", tuple(Fraction(v) for v in self.range))

    @classmethod
    def interval(cls, var: str, lo: int, hi: int) -> "LogicalBinding":
        return cls(var, tuple(range(int(lo), int(hi) + 1)))


@dataclass(frozen=True)
class Valid:
    ok = True

    def to_json(self):
        return {"status": "valid"}


@dataclass(frozen=True)
class Invalid:
    state: tuple
    lhs: Fraction
    rhs: Fraction
    ok = False

    def to_json(self):
        return {
            "status": "invalid",
            "state": {k: format_fraction(v) for k, v in self.state},
            "lhs": format_fraction(self.lhs),
            "rhs": format_fraction(self.rhs),
        }


@dataclass(frozen=True)
class RangeViolation:
    """An expectation left [0, 1] at ``state`` (a specification error)."""

    state: tuple
    value: Fraction
    side: str
    ok = False

    def to_json(self):
        return {
            "status": "range-error",
            "state": {k: format_fraction(v) for k, v in self.state},
            "side": self.side,
            "value": format_fraction(self.value),
        }


EntailmentResult = Valid | Invalid | RangeViolation
VALID = Valid()


def entails(f: Expectation, g: Expectation, space, bindings: Sequence[LogicalBinding] = ()) -> EntailmentResult:
    """Decide f => g by enumerating ``space`` times the binding ranges.

    Only variables free in f or g are enumerated; the others are pinned to
    the first value of their domain.  Because states are ordered
    lexicographically by declaration order, the first failing state found
    this way is also the first failing state of the full product.
    """
    fv = free_vars(f) | free_vars(g)
    axes = []
    for name, dom in space.domains.items():
        vals = dom.values if name in fv else dom.values[:1]
        axes.append((name, vals))
    for b in bindings:
        axes.append((b.var, b.range if b.var in fv else b.range[:1]))
    missing = fv - {n for n, _ in axes}
    if missing:
        raise X.UnboundVariableError(", ".join(sorted(missing)))
    names = [n for n, _ in axes]
    for combo in itertools.product(*(v for _, v in axes)):
        s = dict(zip(names, combo))
        memo = {}
        lv = _value(f, s, memo)
        rv = _value(g, s, memo)
        for side, v in (("lhs", lv), ("rhs", rv)):
            if not (0 <= v <= 1):
                return RangeViolation(_full_state(s, space, bindings), v, side)
        if lv > rv:
            return Invalid(_full_state(s, space, bindings), lv, rv)
    return VALID


def _full_state(s, space, bindings):
    return tuple((n, s[n]) for n in list(space.domains) + [b.var for b in bindings])


def entailment_json(result: EntailmentResult) -> str:
    return json.dumps(result.to_json(), sort_keys=False)


# ----------------------------------------------------------------- printing
#
# Levels: 1 sum, 2 product, 5 atom.  Output reparses to the same tree.


def _level(e: Expectation) -> int:
    t = type(e)
    if t is Sum:
        return 1
    if t in (Scale, Product):
        return 2
    if t is Const:
        return 5 if e.value.denominator == 1 and e.value >= 0 else 2
    if t is Arith:
        lv = X._level(e.expr)
        return 5 if lv >= 3 else lv
    return 5


def _wrap(e: Expectation, need: int) -> str:
    s = format_expectation(e)
    return f"({s})" if _level(e) < need else s


def format_expectation(e: Expectation) -> str:
    t = type(e)
    if t is Const:
        return format_fraction(e.value)
    if t is Iverson:
        return f"[{format_bool(e.cond)}]"
    if t is Arith:
        s = format_arith(e.expr)
        return f"({s})" if X._level(e.expr) == 3 else s
    if t is Sum:
        return " + ".join(_wrap(a, 2) for a in e.terms)
    if t is Scale:
        q = format_fraction(e.factor)
        if e.factor < 0:
            q = f"({q})" if e.factor.denominator != 1 else q
        return f"{q} * {_wrap(e.body, 3)}"
    return f"{_wrap(e.left, 2)} * {_wrap(e.right, 3)}"


def format_entailment(f: Expectation, g: Expectation) -> str:
    return f"{format_expectation(f)} => {format_expectation(g)}"
