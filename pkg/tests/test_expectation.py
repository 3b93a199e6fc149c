import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pexp_slicer import expectation as E
from pexp_slicer.expectation import (
    ExpectationRangeError,
    Invalid,
    LogicalBinding,
    RangeViolation,
    entailment_json,
    entails,
    evaluate,
    format_expectation,
    free_vars,
    iverson,
    simplify,
    substitute,
)
from pexp_slicer.lang import State, StateSpace, VarDomain, eval_arith, parse_arith, parse_bool, parse_expectation, state_update
from pexp_slicer.lang import exprs as X

Y_GRID = (-1, Fraction(-4, 5), Fraction(-7, 10), 0, Fraction(7, 10), Fraction(4, 5), 1)
X_GRID = (-1, 0, Fraction(1, 2), 1, Fraction(3, 2), 2, 3)
SPACE = StateSpace([VarDomain("y", Y_GRID), VarDomain("x", X_GRID)])
half = Fraction(1, 2)


def S(**kw):
    return State({k: Fraction(v) for k, v in kw.items()})


def test_iverson_examples():
    assert evaluate(iverson(X.TRUE), S(x=5)) == 1
    assert evaluate(iverson(parse_bool("x >= 0")), S(x=-1)) == 0
    assert evaluate(iverson(parse_bool("y*y <= 1/2")), S(y=Fraction(7, 10))) == 1


def test_iverson_of_closed_condition_folds():
    assert iverson(parse_bool("1 < 2")) == E.ONE
    assert iverson(parse_bool("2 < 1")) == E.ZERO


def test_substitute_example_one():
    g = parse_expectation("[x >= 0]")
    assert substitute(g, "x", parse_arith("3/2 - y*y")) == parse_expectation("[3/2 - y*y >= 0]")


def test_substitute_frame():
    g = parse_expectation("1/2 * [y = 0]")
    assert substitute(g, "x", parse_arith("x + 1")) is g


def test_substitute_example_two_pointwise():
    g = parse_expectation("1/2 * [x >= 1] + 1/2 * [x >= 2]")
    got = substitute(g, "x", parse_arith("3/2 - y*y"))
    want = parse_expectation("1/2 * [y*y <= 1/2] + 1/2 * [y*y <= -1/2]")
    for s in SPACE:
        assert evaluate(got, s) == evaluate(want, s)


def test_evaluate_examples():
    assert evaluate(E.const(half), S()) == half
    e = parse_expectation("1/2 * [y*y <= 1/2]")
    assert evaluate(e, S(y=0)) == half


def test_evaluate_range_check():
    e = parse_expectation("3/4 * [b = 1] + 3/4 * [b != 1]")
    assert evaluate(e, S(b=1)) == Fraction(3, 4)
    over = parse_expectation("3/4 * [b >= 0] + 3/4 * [b >= 1]")
    assert evaluate(over, S(b=0)) == Fraction(3, 4)
    with pytest.raises(ExpectationRangeError):
        evaluate(over, S(b=1))


def test_entails_zero_is_bottom():
    assert entails(E.ZERO, parse_expectation("[x >= 0]"), SPACE).ok


def test_entails_example_two():
    w2 = parse_expectation("1/2 * [x - 1 >= 0] + 1/2 * [x - 2 >= 0]")
    w3 = parse_expectation("[x >= 0]")
    assert entails(w2, w3, SPACE).ok


def test_entails_counterexample_is_first_state():
    f = parse_expectation("[x >= 0]")
    g = parse_expectation("1/2 * [x >= 1] + 1/2 * [x >= 2]")
    r = entails(f, g, SPACE)
    assert isinstance(r, Invalid)
    assert dict(r.state) == {"y": -1, "x": 0}
    assert (r.lhs, r.rhs) == (1, 0)
    assert r.lhs > r.rhs


def test_entailment_json_shape():
    sp = StateSpace([VarDomain("x", (0, 1))])
    r = entails(E.const(half), iverson(parse_bool("x = 1")), sp)
    assert json.loads(entailment_json(r)) == {"status": "invalid", "state": {"x": "0"}, "lhs": "1/2", "rhs": "0"}


def test_entails_range_violation():
    sp = StateSpace([VarDomain("x", (0, 1))])
    r = entails(E.ZERO, E.add(iverson(parse_bool("x >= 0")), iverson(parse_bool("x >= 1"))), sp)
    assert isinstance(r, RangeViolation) and r.side == "rhs" and r.value == 2


def test_entails_with_binding():
    sp = StateSpace([VarDomain("v", (0, 1))])
    b = LogicalBinding.interval("v0", 0, 1)
    lhs = E.scale(half, iverson(parse_bool("v = 1 && v = v0")))
    assert entails(lhs, iverson(parse_bool("v < v0 + 1")), sp, [b]).ok
    r = entails(iverson(parse_bool("v = v0")), E.ZERO, sp, [b])
    assert dict(r.state) == {"v": 0, "v0": 0}


def test_entails_unbound_logical_variable():
    with pytest.raises(X.UnboundVariableError):
        entails(iverson(parse_bool("x < v0")), E.ONE, SPACE)


def test_binding_needs_values():
    with pytest.raises(ValueError):
        LogicalBinding("v0", ())


def test_expectation_printing_round_trips():
    for text in [
        "1/2 * [y*y <= 1/2]",
        "[a != b && n < K] * 2^(n - K) + [a = b && n = K]",
        "2^-K * [K > 0]",
        "21623/4000000 + 99 * 219877/200000000",
    ]:
        e = parse_expectation(text)
        assert parse_expectation(format_expectation(e)) == e


# -- properties over small generated expectations ----------------------------

SMALL = StateSpace([VarDomain("a", (0, 1, 2)), VarDomain("b", (0, 1))])
conds = st.builds(
    X.Cmp,
    st.sampled_from(["=", "!=", "<", "<=", ">", ">="]),
    st.sampled_from(["a", "b"]).map(X.Var),
    st.integers(0, 2).map(X.num),
)
probs = st.fractions(0, 1, max_denominator=6)
exps = st.recursive(
    st.one_of(probs.map(E.const), conds.map(iverson)),
    lambda kids: st.one_of(
        st.builds(lambda q, l, r: E.add(E.scale(q, l), E.scale(1 - q, r)), probs, kids, kids),
        st.builds(E.mul, kids, kids),
        st.builds(E.guard, conds, kids),
    ),
    max_leaves=5,
)
terms = st.one_of(
    st.integers(0, 2).map(X.num),
    st.sampled_from(["a", "b"]).map(X.Var),
    st.builds(lambda v: X.sub(X.num(2), X.Var(v)), st.sampled_from(["a", "b"])),
)


@settings(max_examples=150, deadline=None)
@given(exps, st.sampled_from(["a", "b"]), terms)
def test_substitution_lemma(e, x, term):
    sub = substitute(e, x, term)
    for s in SMALL:
        assert evaluate(sub, s, check_range=False) == evaluate(e, state_update(s, x, eval_arith(term, s)), check_range=False)


@settings(max_examples=100, deadline=None)
@given(exps)
def test_substitution_leaves_no_residue(e):
    sub = substitute(e, "a", X.num(1))
    assert "a" not in free_vars(sub)


@settings(max_examples=100, deadline=None)
@given(exps, exps, exps)
def test_entails_reflexive_and_transitive(f, g, h):
    assert entails(f, f, SMALL).ok
    if entails(f, g, SMALL).ok and entails(g, h, SMALL).ok:
        assert entails(f, h, SMALL).ok


@settings(max_examples=100, deadline=None)
@given(exps, exps)
def test_entails_antisymmetric_up_to_values(f, g):
    if entails(f, g, SMALL).ok and entails(g, f, SMALL).ok:
        assert all(evaluate(f, s) == evaluate(g, s) for s in SMALL)


@settings(max_examples=100, deadline=None)
@given(conds, conds)
def test_lifting_consistency(p, q):
    implies = all(not X.eval_bool(p, s) or X.eval_bool(q, s) for s in SMALL)
    assert entails(iverson(p), iverson(q), SMALL).ok == implies


@settings(max_examples=100, deadline=None)
@given(exps)
def test_simplify_preserves_values(e):
    s2 = simplify(e)
    assert all(evaluate(e, s) == evaluate(s2, s) for s in SMALL)


@settings(max_examples=100, deadline=None)
@given(exps)
def test_format_round_trip(e):
    back = parse_expectation(format_expectation(e))
    assert all(evaluate(e, s) == evaluate(back, s) for s in SMALL)
