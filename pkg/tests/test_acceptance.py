"""Acceptance criteria 1-12.  Each test records one PASS/FAIL line; the lines
are printed together in the terminal summary (see conftest.py)."""

import functools
import json
import time
from fractions import Fraction

import pytest

import props
from conftest import FIXTURES, load_fixture
from pexp_slicer import expectation as E
from pexp_slicer.cli import main
from pexp_slicer.lang import SKIP, is_portion_of, parse_prog, pretty_print
from pexp_slicer.semantics import wp_eval
from pexp_slicer.slicegraph import build_slice_graph, min_slice
from pexp_slicer.slicing import greedy_slice, local_specifications, replace_subprogram, resolve, verify_slice
from pexp_slicer.vcgen import discharge, vcg, wpre_suffix
from randprog import corpus

RESULTS: dict = {}
half = Fraction(1, 2)


def criterion(n: int, title: str):
    def wrap(fn):
        @functools.wraps(fn)
        def run(*a, **kw):
            ok = False
            try:
                fn(*a, **kw)
                ok = True
            finally:
                RESULTS[n] = f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}"
                print(RESULTS[n])

        return run

    return wrap


def cli(capsys, *argv):
    code = main(list(argv))
    out, _ = capsys.readouterr()
    return code, out


@pytest.fixture(scope="module")
def cases():
    return corpus(props.CORPUS_SIZE)


@criterion(1, "exact wp of prog1 is 1/2*[y*y <= 1/2] on the y grid, under 1 s")
def test_c01_exact_wp(capsys, monkeypatch):
    monkeypatch.setenv("PEXP_COLOR", "0")
    t0 = time.perf_counter()
    code, out = cli(capsys, "oracle", "fixture:prog1", "--format", "json", "--transformer", "wp")
    elapsed = time.perf_counter() - t0
    data = json.loads(out)
    assert code == 0 and data["transformer"] == "wp" and data["exact"]
    ys = {Fraction(r["state"]["y"]) for r in data["rows"]}
    assert ys == {Fraction(v) for v in ("-1", "-4/5", "-7/10", "0", "7/10", "4/5", "1")}
    for row in data["rows"]:
        y = Fraction(row["state"]["y"])
        assert Fraction(row["value"]) == (half if y * y <= half else 0)
    assert elapsed < 1.0


@criterion(2, "slice of prog1 is exactly x := 3/2 - y*y")
def test_c02_prog1_slice(capsys):
    for extra in ([], ["--greedy"]):
        code, out = cli(capsys, "slice", "fixture:prog1", *extra)
        assert code == 0
        assert out.splitlines()[0] == "x := 3/2 - y*y"
        assert out.split("\n\n")[0] == "x := 3/2 - y*y"


@criterion(3, "randint: wpre^1 is the constant 1/2; least slice keeps only b3 := 1 and r")
def test_c03_randint():
    r = load_fixture("randint")
    assert r.space.domains["K"].values == tuple(Fraction(v) for v in (0, 4, 8, 12, 15))
    w = wpre_suffix(1, r.prog, r.spec[1])
    assert {E.evaluate(w, s) for s in r.space} == {half}
    assert E.simplify(w) == E.const(half)
    expected = parse_prog("{ skip } [1/2] { b3 := 1 }; r := b0 + 2*b1 + 4*b2 + 8*b3")
    graph = min_slice(build_slice_graph(r.prog, *r.spec, r.mode, r.space)).prog
    greedy = greedy_slice(r.prog, *r.spec, r.mode, r.space).prog
    assert graph == expected and greedy == expected


@criterion(4, "coin game: total check passes, slice drops a := 1 - a, body specs valid")
def test_c04_coin_game(capsys, monkeypatch):
    monkeypatch.setenv("PEXP_COLOR", "0")
    r = load_fixture("coin_game")
    doms = {v: d.values for v, d in r.space.domains.items()}
    assert doms == {
        "K": (1, 2, 3),
        "n": (0, 1, 2, 3),
        "a": (0, 1),
        "b": (0, 1),
    }
    loop = r.prog.inst(4)
    ann = loop.require_total()
    assert (ann.lower, ann.upper, ann.eps) == (0, 1, half)
    code, out = cli(capsys, "check", "fixture:coin_game")
    assert code == 0 and out.rstrip().endswith("overall: valid")
    code, out = cli(capsys, "slice", "fixture:coin_game", "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["verified"]
    assert any("a := 1 - a" in r_["code"] for r_ in data["removals"])
    assert "a := 1 - a" not in data["slice"]
    body_specs = [s for s in local_specifications(r.prog, *r.spec, r.mode) if s.path == (4, "body")]
    assert len(body_specs) == 3
    sliced_body = resolve(parse_prog(data["slice"]), (4, "body"))
    for s in body_specs:
        assert discharge(s.vcg(resolve(r.prog, (4, "body"))), r.space).valid
        assert discharge(s.vcg(sliced_body), r.space).valid


def _removals(capsys, name):
    code, out = cli(capsys, "slice", f"fixture:{name}", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data["verified"]
    return {p for r in data["removals"] for p in r["removed"]}


@criterion(5, "case study [x = 1]: exact wpre^1 and the removal set i5, i8, both x := 0")
def test_c05_case_study_x(capsys):
    r = load_fixture("bn_x")
    assert wpre_suffix(1, r.prog, r.spec[1], total=True) == E.const(
        Fraction(21623, 4 * 10**6) + 99 * Fraction(219877, 2 * 10**8)
    )
    removed = _removals(capsys, "bn_x")
    assert {"[5]", "[8]", "[7].then[1].right[1]", "[7].else[1].right[1]"} <= removed
    assert "[7]" not in removed and "[6]" not in removed


@criterion(6, "case study [t = 1 && l = 1]: exact wpre^1 and the removal set i5-i8, t := 0, l := 0")
def test_c06_case_study_tl(capsys):
    r = load_fixture("bn_tl")
    assert wpre_suffix(1, r.prog, r.spec[1], total=True) == E.const(
        Fraction(11, 4 * 10**4) + 99 * Fraction(11, 2 * 10**6)
    )
    removed = _removals(capsys, "bn_tl")
    assert {"[5]", "[6]", "[7]", "[8]"} <= removed
    assert {f"[{i}].{side}[1].right[1]" for i in (3, 4) for side in ("then", "else")} <= removed


@criterion(7, "geometric loop: wp of [true] >= 1 - 1e-6 everywhere, under 1 s")
def test_c07_geometric():
    r = load_fixture("geometric")
    t0 = time.perf_counter()
    table = wp_eval(r.prog, E.ONE, r.space)
    elapsed = time.perf_counter() - t0
    assert all(float(v) >= 1 - 1e-6 for _, v in table.items())
    assert elapsed < 1.0


@criterion(8, "soundness of VCG and total VCG against the wp/wlp oracle, >= 500 programs")
def test_c08_soundness(cases):
    assert len(cases) >= 500
    out = props.soundness(cases)
    assert out.checked > 0
    assert out.violations == []


@criterion(9, "linearity and monotonicity of wpre, vc, VCG in both modes, exact")
def test_c09_lemmas(cases):
    out = props.lemma_checks(cases)
    assert out.checked == len(cases)
    assert out.violations == []


@criterion(10, "decomposition: VCG verdict equals the conjunction of the split verdicts")
def test_c10_decomposition(cases):
    out = props.decomposition_checks(cases)
    assert out.checked > 0
    assert out.violations == []


@criterion(11, "every greedy and graph slice of every fixture verifies and is a portion")
def test_c11_fixture_slices(capsys):
    bad = []
    for name in FIXTURES:
        r = load_fixture(name)
        for extra in ([], ["--greedy"]):
            code, out = cli(capsys, "slice", f"fixture:{name}", "--format", "json", *extra)
            if code != 0 or not json.loads(out)["verified"]:
                bad.append((name, extra, "cli"))
        for res in (
            greedy_slice(r.prog, *r.spec, r.mode, r.space).prog,
            min_slice(build_slice_graph(r.prog, *r.spec, r.mode, r.space)).prog,
        ):
            if not (is_portion_of(res, r.prog) and verify_slice(res, *r.spec, r.prog, r.mode, r.space)):
                bad.append((name, pretty_print(res)))
    assert bad == []


@criterion(12, "the [3/4]-choice right branch is removable but is not removed")
def test_c12_precision_limit():
    r = load_fixture("choice34")
    # removable: the spec still holds without it
    without = replace_subprogram(r.prog, (1, "right"), SKIP)
    assert discharge(vcg(r.spec[0], without, r.spec[1]), r.space).valid
    # yet local reasoning keeps it
    assert greedy_slice(r.prog, *r.spec, r.mode, r.space).prog == r.prog
    assert min_slice(build_slice_graph(r.prog, *r.spec, r.mode, r.space)).prog == r.prog
