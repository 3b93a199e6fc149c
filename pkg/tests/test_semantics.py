import math
import time
from fractions import Fraction

import pytest

from conftest import load_fixture
from pexp_slicer import expectation as E
from pexp_slicer.expectation import evaluate, iverson
from pexp_slicer.lang import SKIP, State, StateSpace, VarDomain, parse_bool, parse_expectation, parse_prog
from pexp_slicer.semantics import DomainEscapeError, NonConvergenceError, simulate, wlp_eval, wp_eval
from pexp_slicer.vcgen import wpre

half = Fraction(1, 2)


def test_prog1_exact_table():
    r = load_fixture("prog1")
    t = wp_eval(r.prog, r.spec[1], r.space)
    assert t.exact
    for s, v in t.items():
        assert v == (half if s["y"] ** 2 <= half else 0)


def test_skip_is_identity():
    r = load_fixture("prog1")
    t = wp_eval(SKIP, r.spec[1], r.space)
    assert all(v == evaluate(r.spec[1], s) for s, v in t.items())


def test_geometric_terminates_almost_surely():
    r = load_fixture("geometric")
    start = time.perf_counter()
    t = wp_eval(r.prog, E.ONE, r.space)
    assert time.perf_counter() - start < 1
    assert not t.exact
    assert all(v >= 1 - 1e-6 for _, v in t.items())
    # frozen: 31 halvings bring the residue below 1e-9
    assert t.iterations == 31


def test_geometric_wlp_of_exit_state():
    r = load_fixture("geometric")
    t = wlp_eval(r.prog, iverson(parse_bool("c = 0")), r.space)
    assert all(abs(v - 1) <= 1e-6 for _, v in t.items())


def test_wlp_of_diverging_loop_is_one():
    sp = StateSpace([VarDomain("x", (0, 1))])
    p = parse_prog("while (true) @invariant{1} do { skip }")
    g = iverson(parse_bool("x = 7"))
    assert all(v == 1 for _, v in wlp_eval(p, g, sp).items())
    assert all(v == 0 for _, v in wp_eval(p, g, sp).items())


def test_loop_free_wp_equals_wlp_equals_wpre():
    r = load_fixture("randint")
    g = r.spec[1]
    a, b = wp_eval(r.prog, g, r.space), wlp_eval(r.prog, g, r.space)
    w = wpre(r.prog, g)
    assert a.exact and b.exact
    for (s, x), (_, y) in zip(a.items(), b.items()):
        assert x == y == evaluate(w, s)


def test_wp_below_wlp_on_loops():
    sp = StateSpace([VarDomain("x", (0, 1, 2)), VarDomain("y", (0, 1, 2))])
    p = parse_prog(
        "while (x != 0) @invariant{1} do { { x := 0 } [1/3] { x := 2 - x }; if (x = 1) { y := 2 - y } else { skip } }"
    )
    g = parse_expectation("[y = 2]")
    a, b = wp_eval(p, g, sp), wlp_eval(p, g, sp)
    assert all(x <= y + 1e-9 for (_, x), (_, y) in zip(a.items(), b.items()))
    # the loop exits almost surely, so the two coincide
    assert all(abs(x - y) <= 1e-8 for (_, x), (_, y) in zip(a.items(), b.items()))


def test_coin_game_counter_escapes_its_grid():
    # n counts rounds without bound; the oracle rejects rather than clamps
    r = load_fixture("coin_game")
    with pytest.raises(DomainEscapeError, match="n=4"):
        wp_eval(r.prog, r.spec[1], r.space)


def test_bounded_retry_loop_frozen():
    sp = StateSpace([VarDomain("c", (0, 1)), VarDomain("k", (0, 1, 2))])
    p = parse_prog("c := 1; k := 0; while (c = 1 && k < 2) @invariant{1} do { { c := 0 } [1/2] { skip }; k := k + 1 }")
    t = wp_eval(p, parse_expectation("[c = 0]"), sp)
    assert all(math.isclose(v, 0.75, abs_tol=1e-12) for _, v in t.items())


def test_linearity_on_loop_free_program():
    r = load_fixture("prog1")
    g1 = iverson(parse_bool("x >= 0"))
    g2 = iverson(parse_bool("x >= 1"))
    q = Fraction(1, 3)
    mix = wp_eval(r.prog, E.add(E.scale(q, g1), E.scale(1 - q, g2)), r.space)
    a, b = wp_eval(r.prog, g1, r.space), wp_eval(r.prog, g2, r.space)
    for (_, m), (_, x), (_, y) in zip(mix.items(), a.items(), b.items()):
        assert m == q * x + (1 - q) * y


def test_domain_escape_in_loop_body():
    sp = StateSpace([VarDomain("x", (0, 1))])
    p = parse_prog("while (x = 1) @invariant{1} do { x := x + 1 }")
    with pytest.raises(DomainEscapeError, match="outside the declared domains"):
        wp_eval(p, E.ONE, sp)


def test_non_convergence_reported():
    r = load_fixture("geometric")
    with pytest.raises(NonConvergenceError):
        wp_eval(r.prog, E.ONE, r.space, tol=1e-12, max_iter=5)


def test_to_csv():
    sp = StateSpace([VarDomain("x", (0, 1))])
    t = wp_eval(parse_prog("{ x := 1 } [1/4] { x := 0 }"), iverson(parse_bool("x = 1")), sp)
    assert t.to_csv() == "x,value\n0,1/4\n1,1/4\n"


# -- sampler ----------------------------------------------------------------


def test_simulate_skip():
    s = State({"x": Fraction(0)})
    out = simulate(SKIP, s, 10, seed=1)
    assert out == {s: 10} and out.censored == 0


def test_simulate_deterministic_per_seed():
    r = load_fixture("randint")
    s = next(iter(r.space))
    assert simulate(r.prog, s, 200, seed=7) == simulate(r.prog, s, 200, seed=7)


def test_simulate_prog1_half():
    r = load_fixture("prog1")
    n = 10_000
    out = simulate(r.prog, State({"y": Fraction(0), "x": Fraction(0)}), n, seed=2024)
    hits = sum(c for t, c in out.items() if t["x"] >= 0)
    assert abs(hits / n - 0.5) <= 3 * math.sqrt(0.25 / n)


def test_simulate_coin_game_k3():
    r = load_fixture("coin_game")
    n = 4000
    s = State({"K": Fraction(3), "n": Fraction(0), "a": Fraction(0), "b": Fraction(0)})
    out = simulate(r.prog, s, n, seed=11)
    hits = sum(c for t, c in out.items() if t["n"] == 3)
    p = 1 / 8
    assert abs(hits / n - p) <= 3 * math.sqrt(p * (1 - p) / n)
    assert sum(out.values()) + out.censored == n


def test_simulate_step_cap_censors():
    p = parse_prog("while (true) @invariant{1} do { skip }")
    out = simulate(p, State({"x": Fraction(0)}), 3, seed=0, step_cap=50)
    assert out.censored == 3 and sum(out.values()) == 0


def test_simulate_rejects_zero_runs():
    with pytest.raises(ValueError):
        simulate(SKIP, State({}), 0, seed=0)
