from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FIXTURES, fixture_text, load_fixture
from pexp_slicer.lang import (
    Assign,
    Cond,
    Mode,
    PChoice,
    ParseError,
    Prog,
    SKIP,
    Skip,
    StateSpace,
    State,
    UnboundVariableError,
    VarDomain,
    While,
    eval_arith,
    is_portion_of,
    parse_arith,
    parse_program,
    parse_prog,
    pretty_print,
    prog,
    state_update,
)
from pexp_slicer.lang import exprs as X
from pexp_slicer.slicing import remove

HEADER = "domains { x in {0, 1}; }\nspec partial pre{ 0 } post{ [true] }\n"


def test_parse_prog1_fixture():
    r = load_fixture("prog1")
    assert len(r.prog) == 2
    assert r.mode is Mode.PARTIAL
    assert isinstance(r.prog.inst(1), Assign)
    assert isinstance(r.prog.inst(2), PChoice)
    assert pretty_print(r.prog) == "x := 3/2 - y*y;\n{ x := x - 1 } [1/2] { x := x - 2 }"
    y = r.space.domains["y"].values
    assert y == (-1, Fraction(-4, 5), Fraction(-7, 10), 0, Fraction(7, 10), Fraction(4, 5), 1)


def test_parse_skip_only():
    r = parse_program(HEADER + "program { skip }")
    assert r.prog == SKIP
    assert len(r.prog) == 1


def test_total_mode_requires_variant():
    src = (
        "domains { x in {0, 1}; }\nspec total pre{ 0 } post{ 1 }\n"
        "program { while (x = 1) @invariant{1} @terminates{true} @bounds{0, 1} @eps{1} do { x := 0 } }"
    )
    with pytest.raises(ParseError):
        parse_program(src)


def test_total_mode_requires_annotations():
    src = "domains { x in {0, 1}; }\nspec total pre{ 0 } post{ 1 }\nprogram { while (x = 1) @invariant{1} do { x := 0 } }"
    with pytest.raises(ParseError, match="lacks"):
        parse_program(src)


def test_loop_requires_invariant():
    with pytest.raises(ParseError):
        parse_program(HEADER + "program { while (x = 1) do { x := 0 } }")


def test_syntax_error_has_position():
    with pytest.raises(ParseError) as info:
        parse_program(HEADER + "program {\n  x := ;\n}")
    assert info.value.line == 4


def test_undeclared_variable():
    with pytest.raises(ParseError, match="z"):
        parse_program(HEADER + "program { z := 1 }")


def test_non_integer_variant_rejected():
    src = (
        "domains { x in {0, 1}; }\nspec total pre{ 0 } post{ 1 }\n"
        "program { while (x = 1) @invariant{1} @terminates{true} @variant{x/2} @bounds{0, 1} @eps{1} do { x := 0 } }"
    )
    with pytest.raises(ParseError):
        parse_program(src)


def test_ranges_and_comments():
    r = parse_program("# a comment\ndomains { n in {0..3}; }\nspec partial pre{0} post{1}\nprogram { n := n }")
    assert r.space.domains["n"].values == (0, 1, 2, 3)


def test_if_without_else_is_else_skip():
    p = parse_prog("if (x = 1) { x := 0 }")
    assert p.inst(1).orelse == SKIP


def test_eval_arith_examples():
    e = parse_arith("3/2 - y*y")
    assert eval_arith(e, {"y": Fraction(0)}) == Fraction(3, 2)
    q = Fraction(7, 3)
    assert eval_arith(X.Var("x"), {"x": q}) == q
    r = parse_arith("b0 + 2*b1 + 4*b2 + 8*b3")
    assert eval_arith(r, {f"b{i}": Fraction(1) for i in range(4)}) == 15


def test_eval_arith_unbound():
    with pytest.raises(UnboundVariableError):
        eval_arith(X.Var("x"), {})


def test_state_update():
    s = State({"x": Fraction(0), "y": Fraction(1)})
    t = state_update(s, "x", Fraction(2))
    assert t["x"] == 2 and t["y"] == 1
    assert s["x"] == 0
    assert state_update(t, "x", Fraction(0)) == s


def test_state_space_enumeration():
    sp = StateSpace([VarDomain("a", (0, 1, 2)), VarDomain("b", (0, 1))])
    states = list(sp.enumerate())
    assert len(states) == sp.size == 6
    assert len(set(states)) == 6
    assert states[0] == State({"a": 0, "b": 0}) and states[1] == State({"a": 0, "b": 1})


def test_var_domain_rejects_duplicates():
    with pytest.raises(ValueError):
        VarDomain("a", (0, 0))
    with pytest.raises(ValueError):
        VarDomain("a", ())


def test_pchoice_probability_checked():
    with pytest.raises(ValueError):
        PChoice(SKIP, Fraction(3, 2), SKIP)


# -- is_portion_of ----------------------------------------------------------


def _five():
    return parse_prog("a := 1; a := 2; a := 3; a := 4; a := 5")


def test_portion_examples():
    p = _five()
    assert is_portion_of(SKIP, p)
    assert is_portion_of(p, p)
    assert is_portion_of(prog(p.inst(1), p.inst(5)), p)
    assert not is_portion_of(prog(p.inst(5), p.inst(1)), p)


def test_portion_congruences():
    o = parse_prog("if (a = 1) { a := 2; a := 3 } else { a := 4 }; { a := 5 } [1/2] { a := 0 }")
    c = parse_prog("if (a = 1) { a := 3 } else { skip }; { skip } [1/2] { a := 0 }")
    assert is_portion_of(c, o)
    wrong_guard = parse_prog("if (a = 2) { a := 3 } else { skip }")
    assert not is_portion_of(wrong_guard, o)
    wrong_prob = parse_prog("{ skip } [1/3] { a := 0 }")
    assert not is_portion_of(wrong_prob, o)


def test_portion_loops():
    o = parse_prog("while (a = 1) @invariant{1} do { a := 0; a := 1 }")
    assert is_portion_of(parse_prog("while (a = 1) @invariant{1} do { a := 1 }"), o)
    assert not is_portion_of(parse_prog("while (a = 1) @invariant{1/2} do { a := 1 }"), o)


def test_portion_of_removed_spans():
    p = _five()
    for j in range(1, 6):
        for k in range(j, 6):
            assert is_portion_of(remove(j, k, p), p)


def test_portion_transitive_on_chain():
    p = _five()
    q = remove(2, 3, p)
    r = remove(1, 1, q)
    assert is_portion_of(q, p) and is_portion_of(r, q) and is_portion_of(r, p)


# -- printing ---------------------------------------------------------------


def test_print_skip():
    assert pretty_print(SKIP) == "skip"


def test_print_nested_while_indents():
    p = parse_prog("while (x = 1) @invariant{[x = 0]} do { if (x = 1) { x := 0 } else { skip } }")
    text = pretty_print(p)
    assert text.splitlines()[0].startswith("while (x = 1) @invariant{[x = 0]} do {")
    assert text.splitlines()[1].startswith("  if (x = 1)")
    assert parse_prog(text) == p


@pytest.mark.parametrize("name", FIXTURES)
def test_fixture_round_trip(name):
    r = load_fixture(name)
    assert parse_prog(pretty_print(r.prog)) == r.prog


# -- round trip over generated programs -------------------------------------

VARS = ("x", "y")
nums = st.fractions(min_value=-3, max_value=3, max_denominator=4).map(X.num)
arith = st.recursive(
    st.one_of(nums, st.sampled_from(VARS).map(X.Var)),
    lambda kids: st.one_of(
        st.builds(X.Add, kids, kids),
        st.builds(X.Sub, kids, kids),
        st.builds(X.Mul, kids, kids),
        st.builds(X.Neg, kids),
    ),
    max_leaves=4,
)
cmps = st.builds(X.Cmp, st.sampled_from(sorted(X.CMP_OPS)), arith, arith)
bools = st.recursive(
    cmps,
    lambda kids: st.one_of(st.builds(X.And, kids, kids), st.builds(X.Or, kids, kids), st.builds(X.Not, kids)),
    max_leaves=4,
)
probs = st.fractions(min_value=0, max_value=1, max_denominator=8)


def _progs(insts):
    return st.lists(insts, min_size=1, max_size=3).map(lambda xs: Prog(tuple(xs)))


insts = st.recursive(
    st.one_of(st.just(Skip()), st.builds(Assign, st.sampled_from(VARS), arith)),
    lambda kids: st.one_of(
        st.builds(Cond, bools, _progs(kids), _progs(kids)),
        st.builds(PChoice, _progs(kids), probs, _progs(kids)),
    ),
    max_leaves=5,
)


@settings(max_examples=120, deadline=None)
@given(_progs(insts))
def test_print_parse_round_trip(p):
    # the parser folds closed terms, so the canonical form is parse(print(p))
    q = parse_prog(pretty_print(p))
    assert parse_prog(pretty_print(q)) == q
    assert pretty_print(parse_prog(pretty_print(q))) == pretty_print(q)


@settings(max_examples=200, deadline=None)
@given(arith, st.fixed_dictionaries({v: st.fractions(-3, 3, max_denominator=4) for v in VARS}))
def test_arith_round_trip_preserves_value(e, s):
    back = parse_arith(X.format_arith(e))
    try:
        want = eval_arith(e, s)
    except ZeroDivisionError:
        return
    assert eval_arith(back, s) == want


@settings(max_examples=100, deadline=None)
@given(_progs(insts))
def test_portion_reflexive_and_skip_bottom(p):
    assert is_portion_of(p, p)
    assert is_portion_of(SKIP, p)


def test_fixture_sources_parse():
    for name in FIXTURES:
        assert parse_program(fixture_text(name)).prog
