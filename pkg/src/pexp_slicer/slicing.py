"""Removing instructions while keeping a program's specification provable.

A *region* is a maximal instruction sequence: the root program, a branch of
an ``if`` or of a choice, or a loop body.  Each region carries the local
specifications the root specification induces on it.  A span ``i_j..i_k`` of
a region may go when, for every local specification (pre, post) of the
region, either

* ``wpre^j(post) => wpre^{k+1}(post)``, or
* ``j = 1`` and ``pre => wpre^{k+1}(post)``.

Removing the whole region leaves ``skip``.  Paths address regions and
instructions as tuples alternating a 1-based index and a branch name, e.g.
``(7, "then", 1, "right")`` for the right branch of the first instruction in
the then-branch of instruction 7.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

from . import expectation as E
from .expectation import Expectation, LogicalBinding, format_entailment, free_vars, iverson
from .lang import exprs as X
from .lang.parser import Mode
from .lang.portion import is_portion_of
from .lang.printer import format_inst
from .lang.syntax import SKIP, Cond, Inst, PChoice, Prog, Skip, While
from .vcgen import EntailmentChecker, discharge, suffix_wpres, vcg, wpre

BRANCHES = ("then", "else", "left", "right", "body")


class PathError(LookupError):
    pass


@dataclass(frozen=True)
class Span:
    """Instructions j..k of the region a path ends in."""

    j: int
    k: int


def format_path(path) -> str:
    out = ""
    for step in path:
        if isinstance(step, int):
            out += f"[{step}]"
        elif isinstance(step, Span):
            out += f"[{step.j}]" if step.j == step.k else f"[{step.j}..{step.k}]"
        else:
            out += "." + step
    return out or "prog"


def _mode(mode) -> Mode:
    return mode if isinstance(mode, Mode) else Mode(str(mode).lower())


# ----------------------------------------------------------------- paths


def _branch(inst: Inst, name: str) -> Prog:
    pairs = {
        Cond: {"then": "then", "else": "orelse"},
        PChoice: {"left": "left", "right": "right"},
        While: {"body": "body"},
    }
    attr = pairs.get(type(inst), {}).get(name)
    if attr is None:
        raise PathError(f"{type(inst).__name__} has no {name!r} branch")
    return getattr(inst, attr)


def _with_branch(inst: Inst, name: str, sub: Prog) -> Inst:
    if isinstance(inst, Cond):
        return Cond(inst.guard, sub, inst.orelse) if name == "then" else Cond(inst.guard, inst.then, sub)
    if isinstance(inst, PChoice):
        return PChoice(sub, inst.prob, inst.right) if name == "left" else PChoice(inst.left, inst.prob, sub)
    return While(inst.guard, inst.invariant, inst.total, sub)


def _split(path):
    steps = list(path)
    span = steps.pop() if steps and isinstance(steps[-1], Span) else None
    if len(steps) % 2:
        raise PathError(f"path {format_path(path)} stops at an instruction, not a region")
    for idx, st in enumerate(steps):
        if idx % 2 == 0 and not isinstance(st, int):
            raise PathError(f"expected an index at step {idx} of {path!r}")
        if idx % 2 == 1 and st not in BRANCHES:
            raise PathError(f"expected a branch name at step {idx} of {path!r}")
    return steps, span


def resolve(p: Prog, path) -> Prog:
    """The region (or, for a trailing Span, the sub-sequence) a path names."""
    steps, span = _split(path)
    cur = p
    for idx in range(0, len(steps), 2):
        j = steps[idx]
        if not 1 <= j <= len(cur):
            raise PathError(f"index {j} outside 1..{len(cur)} in {format_path(path)}")
        cur = _branch(cur.inst(j), steps[idx + 1])
    if span is not None:
        _check_span(span.j, span.k, cur)
        cur = Prog(cur.insts[span.j - 1 : span.k])
    return cur


def _check_span(j: int, k: int, p: Prog):
    if not 1 <= j <= k <= len(p):
        raise PathError(f"span {j}..{k} outside 1..{len(p)}")


def remove(j: int, k: int, p: Prog) -> Prog:
    """Drop i_j..i_k; dropping everything leaves skip."""
    _check_span(j, k, p)
    if (j, k) == (1, len(p)):
        return SKIP
    return Prog(p.insts[: j - 1] + p.insts[k:])


def replace_subprogram(p: Prog, path, replacement: Prog, _rebuilt=None) -> Prog:
    """``p`` with the region (or span) at ``path`` replaced by ``replacement``."""
    steps, span = _split(path)

    def go(cur: Prog, i: int) -> Prog:
        if i == len(steps):
            if span is None:
                return replacement
            _check_span(span.j, span.k, cur)
            return Prog(cur.insts[: span.j - 1] + replacement.insts + cur.insts[span.k :])
        j, name = steps[i], steps[i + 1]
        if not 1 <= j <= len(cur):
            raise PathError(f"index {j} outside 1..{len(cur)} in {format_path(path)}")
        old = cur.inst(j)
        sub = go(_branch(old, name), i + 2)
        if sub is _branch(old, name):
            return cur
        new = _with_branch(old, name, sub)
        if _rebuilt is not None:
            _rebuilt(old, new)
        return Prog(cur.insts[: j - 1] + (new,) + cur.insts[j:])

    return go(p, 0)


# ------------------------------------------------------- local specifications


@dataclass(frozen=True)
class LocalSpec:
    path: tuple
    kind: Mode
    pre: Expectation
    post: Expectation
    bindings: tuple = ()
    rule: str = "refl"

    @property
    def total(self) -> bool:
        return self.kind is Mode.TOTAL

    def key(self):
        return (self.kind, self.pre, self.post, self.bindings)

    def vcg(self, p: Prog):
        return vcg(self.pre, p, self.post, self.total, self.bindings)

    def __str__(self):
        return f"{format_path(self.path)} {self.kind.value}: {format_entailment(self.pre, self.post)}"


@dataclass
class Region:
    path: tuple
    prog: Prog
    specs: tuple
    loop_body: bool = False


def _spec(path, kind, pre, post, scope, rule) -> LocalSpec:
    fv = free_vars(pre) | free_vars(post)
    return LocalSpec(path, kind, pre, post, tuple(b for b in scope if b.var in fv), rule)


def _dedupe(specs) -> tuple:
    seen, out = set(), []
    for s in specs:
        if s.key() not in seen:
            seen.add(s.key())
            out.append(s)
    return tuple(out)


def regions(p: Prog, f: Expectation, g: Expectation, mode) -> Iterator[Region]:
    """Every region of ``p`` with its induced local specifications, preorder."""
    mode = _mode(mode)
    names: dict = {}
    root = LocalSpec((), mode, f, g)

    def visit(path, prog, specs, body):
        yield Region(path, prog, specs, body)
        posts = [suffix_wpres(prog, s.post, s.total) for s in specs]
        for j, inst in enumerate(prog, 1):
            here = path + (j,)
            if isinstance(inst, Cond):
                for name, b, rule in (("then", inst.guard, "ift"), ("else", X.negate(inst.guard), "iff")):
                    sub = _branch(inst, name)
                    child = [
                        _spec(here + (name,), s.kind, E.guard(b, wpre(sub, W[j], s.total)), W[j], s.bindings, rule)
                        for s, W in zip(specs, posts)
                    ]
                    yield from visit(here + (name,), sub, _dedupe(child), False)
            elif isinstance(inst, PChoice):
                for name, rule in (("left", "pl"), ("right", "pr")):
                    sub = _branch(inst, name)
                    child = [
                        _spec(here + (name,), s.kind, wpre(sub, W[j], s.total), W[j], s.bindings, rule)
                        for s, W in zip(specs, posts)
                    ]
                    yield from visit(here + (name,), sub, _dedupe(child), False)
            elif isinstance(inst, While):
                yield from visit(here + ("body",), inst.body, _dedupe(_loop_specs(inst, here, specs, names)), True)

    yield from visit((), p, (root,), False)


def _loop_specs(w: While, here, specs, names) -> list:
    I, G = w.invariant, w.guard
    at = here + ("body",)
    out = []
    for s in specs:
        out.append(_spec(at, Mode.PARTIAL, E.guard(G, I), I, s.bindings, "while"))
        if not s.total:
            continue
        ann = w.require_total()
        v0 = names.setdefault(here, f"v0_{len(names) + 1}")
        scope = s.bindings + (LogicalBinding.interval(v0, ann.lower, ann.upper),)
        GT = X.conj(G, ann.term)
        out.append(_spec(at, Mode.TOTAL, iverson(GT), iverson(ann.term), s.bindings, "while-total"))
        out.append(
            _spec(
                at,
                Mode.TOTAL,
                E.scale(ann.eps, iverson(X.conj(GT, X.cmp("=", ann.variant, X.Var(v0))))),
                iverson(X.cmp("<", ann.variant, X.Var(v0))),
                scope,
                "while-total",
            )
        )
    return out


def local_specifications(p: Prog, f: Expectation, g: Expectation, mode) -> list:
    return [s for r in regions(p, f, g, mode) for s in r.specs]


# ----------------------------------------------------------------- candidates


@dataclass(frozen=True)
class Candidate:
    """A removable span of a region and the rule that justifies it."""

    j: int
    k: int
    rule: str  # "skip", "prefix", "suffix" or "span"
    entailments: tuple


class _SpanTester:
    def __init__(self, region: Region, check: EntailmentChecker):
        self.region = region
        self.check = check
        self.posts = [suffix_wpres(region.prog, s.post, s.total) for s in region.specs]

    def _all(self, pairs):
        out = []
        for (lhs, rhs), s in zip(pairs, self.region.specs):
            if not self.check(lhs, rhs, s.bindings).ok:
                return None
            out.append(format_entailment(lhs, rhs))
        return tuple(out)

    def between(self, j: int, k: int):
        """wpre^j => wpre^k for every local spec (1 <= j < k <= n+1)."""
        return self._all([(W[j - 1], W[k - 1]) for W in self.posts])

    def from_pre(self, k: int):
        """pre => wpre^k for every local spec."""
        return self._all([(s.pre, W[k - 1]) for s, W in zip(self.region.specs, self.posts)])


def region_candidates(region: Region, check: EntailmentChecker) -> list:
    """All removable spans of a region, each with its justification."""
    t = _SpanTester(region, check)
    n = len(region.prog)
    out = []
    for j in range(1, n + 1):
        for k in range(j, n + 1):
            ev = t.between(j, k + 1)
            rule = "suffix" if k == n else "span"
            if ev is None and j == 1:
                ev = t.from_pre(k + 1)
                rule = "skip" if k == n else "prefix"
            if ev is not None:
                out.append(Candidate(j, k, rule, ev))
    return out


def top_level_candidates(p: Prog, g: Expectation, mode, space, checker=None) -> list:
    """Spans (j, k) of the root with wpre^j => wpre^{k+1}."""
    mode = _mode(mode)
    region = Region((), p, (LocalSpec((), mode, E.ZERO, g),))
    t = _SpanTester(region, checker or EntailmentChecker(space))
    n = len(p)
    return [(j, k) for j in range(1, n + 1) for k in range(j, n + 1) if t.between(j, k + 1) is not None]


def _is_noop(region: Region, c: Candidate) -> bool:
    return (c.j, c.k) == (1, len(region.prog)) and region.prog == SKIP


def _gated(region: Region, c: Candidate, mode: Mode, allow_trivial_loop_slices: bool) -> bool:
    return (
        region.loop_body
        and mode is Mode.PARTIAL
        and not allow_trivial_loop_slices
        and (c.j, c.k) == (1, len(region.prog))
    )


def admissible(region, candidates, mode, allow_trivial_loop_slices=False) -> list:
    mode = _mode(mode)
    return [
        c for c in candidates if not _is_noop(region, c) and not _gated(region, c, mode, allow_trivial_loop_slices)
    ]


# ------------------------------------------------------------------- greedy


@dataclass(frozen=True)
class Removal:
    """One applied removal, reported against the original program."""

    paths: tuple  # original paths of the removed instructions
    region: tuple  # original path of the region they belonged to
    rule: str
    entailments: tuple
    code: tuple  # removed instructions, pretty-printed

    def to_json(self):
        return {
            "removed": [format_path(p) for p in self.paths],
            "region": format_path(self.region),
            "rule": self.rule,
            "entailments": list(self.entailments),
            "code": list(self.code),
        }

    def __str__(self):
        where = ", ".join(format_path(p) for p in self.paths)
        lines = [f"removed {where} ({self.rule})"]
        lines += [f"  - {c}" for c in self.code]
        lines += [f"  by {e}" for e in self.entailments]
        return "\n".join(lines)


@dataclass
class SliceResult:
    prog: Prog
    removals: list = field(default_factory=list)
    weight: object = None
    collapses: list = field(default_factory=list)

    def __iter__(self):
        return iter((self.prog, self.weight))

    def removed_paths(self) -> list:
        return [p for r in self.removals for p in r.paths]


class _Origins:
    """Maps instruction objects of a slice back to their original paths."""

    def __init__(self, p: Prog):
        self._map: dict = {}
        self._keep: list = []
        self._walk(p, ())

    def _walk(self, p, path):
        for j, inst in enumerate(p, 1):
            self.register(inst, path + (j,))
            for name in BRANCHES:
                try:
                    sub = _branch(inst, name)
                except PathError:
                    continue
                self._walk(sub, path + (j, name))

    def register(self, inst, path):
        self._keep.append(inst)
        self._map[id(inst)] = path

    def rebuilt(self, old, new):
        if id(old) in self._map:
            self.register(new, self._map[id(old)])

    def of(self, inst):
        return self._map.get(id(inst))

    def region(self, current: Prog, path) -> tuple:
        if not path:
            return ()
        owner = resolve(current, path[:-2]).inst(path[-2])
        return self.of(owner) + (path[-1],)


def greedy_slice(
    p: Prog, f, g, mode, space, allow_trivial_loop_slices: bool = False, checker=None
) -> SliceResult:
    """Apply removals until none is left: outermost region first, then the
    longest span, then the leftmost one."""
    mode = _mode(mode)
    check = checker or EntailmentChecker(space)
    origins = _Origins(p)
    current = p
    removals = []
    while True:
        for region in regions(current, f, g, mode):
            cands = admissible(region, region_candidates(region, check), mode, allow_trivial_loop_slices)
            if not cands:
                continue
            best = min(cands, key=lambda c: (c.j - c.k, c.j))
            removed = region.prog.insts[best.j - 1 : best.k]
            paths = tuple(origins.of(i) for i in removed if origins.of(i) is not None)
            removals.append(
                Removal(
                    paths,
                    origins.region(current, region.path),
                    best.rule,
                    best.entailments,
                    tuple(format_inst(i) for i in removed),
                )
            )
            current = replace_subprogram(
                current, region.path, remove(best.j, best.k, region.prog), _rebuilt=origins.rebuilt
            )
            break
        else:
            return SliceResult(current, removals)


def slice_fixpoint(p: Prog, f, g, mode, space, allow_trivial_loop_slices: bool = False) -> Prog:
    return greedy_slice(p, f, g, mode, space, allow_trivial_loop_slices).prog


def verify_slice(candidate: Prog, f, g, original: Prog, mode, space, checker=None) -> bool:
    """Is ``candidate`` a portion of ``original`` whose verdict is no worse?"""
    if not is_portion_of(candidate, original):
        return False
    total = _mode(mode) is Mode.TOTAL
    check = checker or EntailmentChecker(space)
    if not discharge(vcg(f, original, g, total), space, check).valid:
        return True
    return discharge(vcg(f, candidate, g, total), space, check).valid


__all__ = [
    "BRANCHES",
    "Candidate",
    "LocalSpec",
    "PathError",
    "Region",
    "Removal",
    "SliceResult",
    "Span",
    "admissible",
    "format_path",
    "greedy_slice",
    "local_specifications",
    "region_candidates",
    "regions",
    "remove",
    "replace_subprogram",
    "resolve",
    "slice_fixpoint",
    "top_level_candidates",
    "verify_slice",
]
