"""Verification conditions: wpre / vc / VCG and their total-correctness forms.

Every generator takes ``total`` to select the total-correctness rules.  The
named wrappers (``wpre_total``, ``vc_total``, ``vcg_total``) are provided for
readability.  Indices into programs are 1-based, as in ``i_1; ...; i_n``.

Paths in origin tags look like ``[3].body[2]``: instruction 3 of the root,
then instruction 2 of its loop body.  The root itself is ``prog``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from . import expectation as E
from .expectation import (
    Expectation,
    LogicalBinding,
    Valid,
    entails,
    format_expectation,
    free_vars,
    guard,
    iverson,
)
from .lang import exprs as X
from .lang.syntax import Assign, Cond, PChoice, Prog, Skip, While


# ---------------------------------------------------------------- wpre


def _wpre_inst(inst, g: Expectation, total: bool) -> Expectation:
    if isinstance(inst, Skip):
        return g
    if isinstance(inst, Assign):
        return E.substitute(g, inst.var, inst.expr)
    if isinstance(inst, Cond):
        return E.add(
            guard(inst.guard, wpre(inst.then, g, total)),
            guard(X.negate(inst.guard), wpre(inst.orelse, g, total)),
        )
    if isinstance(inst, PChoice):
        return E.add(
            E.scale(inst.prob, wpre(inst.left, g, total)),
            E.scale(1 - inst.prob, wpre(inst.right, g, total)),
        )
    if isinstance(inst, While):
        if total:
            return guard(inst.require_total().term, inst.invariant)
        return inst.invariant
    raise TypeError(f"not an instruction: {inst!r}")


def wpre(p: Prog, g: Expectation, total: bool = False) -> Expectation:
    """Backward propagation of ``g``; a loop yields its invariant (total: [T]*I)."""
    for inst in reversed(p.insts):
        g = _wpre_inst(inst, g, total)
    return g


def wpre_total(p: Prog, g: Expectation) -> Expectation:
    return wpre(p, g, total=True)


def suffix_wpres(p: Prog, g: Expectation, total: bool = False) -> list:
    """[wpre^1, ..., wpre^{n+1}] as a list indexed from 0."""
    out = [g]
    for inst in reversed(p.insts):
        out.append(_wpre_inst(inst, out[-1], total))
    out.reverse()
    return out


def _check_suffix(j: int, p: Prog):
    if not 1 <= j <= len(p) + 1:
        raise IndexError(f"suffix index {j} outside 1..{len(p) + 1}")


def wpre_suffix(j: int, p: Prog, g: Expectation, total: bool = False) -> Expectation:
    """wpre(i_j; ...; i_n)(g); ``g`` itself when j = n+1."""
    _check_suffix(j, p)
    if j == len(p) + 1:
        return g
    return wpre(Prog(p.insts[j - 1 :]), g, total)


# ---------------------------------------------------------------- VC sets


@dataclass(frozen=True)
class VC:
    lhs: Expectation
    rhs: Expectation
    bindings: tuple = ()
    origin: str = ""

    @property
    def claim(self):
        return (self.lhs, self.rhs, self.bindings)

    def __str__(self):
        s = f"{format_expectation(self.lhs)} => {format_expectation(self.rhs)}"
        if self.bindings:
            s += "  for " + ", ".join(f"{b.var} in {_fmt_range(b)}" for b in self.bindings)
        return s

    def to_json(self):
        return {
            "lhs": format_expectation(self.lhs),
            "rhs": format_expectation(self.rhs),
            "bindings": [{"var": b.var, "range": [X.format_fraction(v) for v in b.range]} for b in self.bindings],
            "origin": self.origin,
        }


def _fmt_range(b: LogicalBinding) -> str:
    lo, hi = b.range[0], b.range[-1]
    if list(b.range) == list(range(int(lo), int(hi) + 1)):
        return f"{X.format_fraction(lo)}..{X.format_fraction(hi)}"
    return "{" + ", ".join(X.format_fraction(v) for v in b.range) + "}"


class VCSet:
    """Claims in insertion order; equal claims merge and keep all origins."""

    def __init__(self, vcs: Iterable[VC] = ()):
        self._first: dict = {}
        self._origins: dict = {}
        for vc in vcs:
            self.add(vc)

    def add(self, vc: VC) -> None:
        key = vc.claim
        if key in self._first:
            if vc.origin not in self._origins[key]:
                self._origins[key].append(vc.origin)
        else:
            self._first[key] = vc
            self._origins[key] = [vc.origin]

    def update(self, other: Iterable[VC]) -> "VCSet":
        if isinstance(other, VCSet):
            for key, vc in other._first.items():
                for o in other._origins[key]:
                    self.add(VC(vc.lhs, vc.rhs, vc.bindings, o))
        else:
            for vc in other:
                self.add(vc)
        return self

    def __or__(self, other):
        return VCSet().update(self).update(other)

    def __iter__(self) -> Iterator[VC]:
        return iter(self._first.values())

    def __len__(self):
        return len(self._first)

    def __contains__(self, claim) -> bool:
        if isinstance(claim, VC):
            claim = claim.claim
        elif len(claim) == 2:
            claim = (claim[0], claim[1], ())
        return claim in self._first

    def origins(self, vc: VC) -> list:
        return list(self._origins[vc.claim])

    def claims(self) -> set:
        return set(self._first)

    def to_json(self):
        out = []
        for vc in self:
            d = vc.to_json()
            d["origins"] = self.origins(vc)
            del d["origin"]
            out.append(d)
        return out


def _vc(lhs, rhs, scope, origin) -> VC:
    fv = free_vars(lhs) | free_vars(rhs)
    return VC(lhs, rhs, tuple(b for b in scope if b.var in fv), origin)


# ---------------------------------------------------------------- vc


class _Fresh:
    def __init__(self):
        self._n = itertools.count(1)

    def __call__(self) -> str:
        return f"v0_{next(self._n)}"


def _path(prefix: str, j: int) -> str:
    return f"{prefix}[{j}]" if prefix != "prog" else f"[{j}]"


def _tag(total: bool, rule: str, path: str) -> str:
    return f"{'total' if total else 'partial'}/{rule} @ {path}"


def _vc_seq(p: Prog, g, total, fresh, scope, prefix, first: int = 1) -> VCSet:
    """vc of i_first..i_n (whose post is g); origins use original indices."""
    out = VCSet()
    insts = p.insts[first - 1 :]
    posts = suffix_wpres(Prog(insts), g, total)[1:] if insts else []
    for k, (inst, post) in enumerate(zip(insts, posts)):
        out.update(_vc_inst(inst, post, total, fresh, scope, _path(prefix, first + k)))
    return out


def _vc_inst(inst, g, total, fresh, scope, here) -> VCSet:
    if isinstance(inst, (Skip, Assign)):
        return VCSet()
    if isinstance(inst, Cond):
        return _vc_seq(inst.then, g, total, fresh, scope, here + ".then") | _vc_seq(
            inst.orelse, g, total, fresh, scope, here + ".else"
        )
    if isinstance(inst, PChoice):
        return _vc_seq(inst.left, g, total, fresh, scope, here + ".left") | _vc_seq(
            inst.right, g, total, fresh, scope, here + ".right"
        )
    if isinstance(inst, While):
        return _vc_loop(inst, g, total, fresh, scope, here)
    raise TypeError(f"not an instruction: {inst!r}")


def _vc_loop(w: While, g, total, fresh, scope, here) -> VCSet:
    I, G, body = w.invariant, w.guard, w.body
    out = VCSet()
    if total:
        ann = w.require_total()
        v0 = fresh()
        b = LogicalBinding.interval(v0, ann.lower, ann.upper)
        inner = tuple(scope) + (b,)
        GT = X.conj(G, ann.term)
        T = iverson(ann.term)
        dec_post = iverson(X.cmp("<", ann.variant, X.Var(v0)))
        dec_pre = E.scale(ann.eps, iverson(X.conj(GT, X.cmp("=", ann.variant, X.Var(v0)))))
        bounds = iverson(
            X.conj(X.cmp("<=", X.num(ann.lower), ann.variant), X.cmp("<=", ann.variant, X.num(ann.upper)))
        )
        out.add(_vc(iverson(GT), wpre(body, T, True), scope, _tag(True, "loop-termination", here)))
        out.add(_vc(dec_pre, wpre(body, dec_post, True), inner, _tag(True, "loop-variant-decrease", here)))
        out.add(_vc(iverson(GT), bounds, scope, _tag(True, "loop-variant-bounds", here)))
        out.update(_vc_seq(body, T, True, fresh, scope, here + ".body"))
        out.update(_vc_seq(body, dec_post, True, fresh, inner, here + ".body"))
    # partial-correctness obligations on I (also part of the total rule)
    out.add(_vc(guard(G, I), wpre(body, I), scope, _tag(False, "loop-invariant", here)))
    out.add(_vc(guard(X.negate(G), I), g, scope, _tag(total, "loop-exit", here)))
    out.update(_vc_seq(body, I, False, fresh, scope, here + ".body"))
    return out


def vc(p: Prog, g: Expectation, total: bool = False, bindings: Sequence[LogicalBinding] = ()) -> VCSet:
    return _vc_seq(p, g, total, _Fresh(), tuple(bindings), "prog")


def vc_total(p: Prog, g: Expectation, bindings=()) -> VCSet:
    return vc(p, g, True, bindings)


def vcg(f: Expectation, p: Prog, g: Expectation, total: bool = False, bindings=()) -> VCSet:
    """{f => wpre(p)(g)} together with vc(p)(g)."""
    out = VCSet([_vc(f, wpre(p, g, total), bindings, _tag(total, "pre", "prog"))])
    return out.update(vc(p, g, total, bindings))


def vcg_total(f, p, g, bindings=()) -> VCSet:
    return vcg(f, p, g, True, bindings)


def vc_suffix(j: int, p: Prog, g, total: bool = False, bindings=()) -> VCSet:
    """vc(i_j; ...; i_n)(g); empty when j = n+1."""
    _check_suffix(j, p)
    if j == len(p) + 1:
        return VCSet()
    return _vc_seq(p, g, total, _Fresh(), tuple(bindings), "prog", first=j)


def vcg_suffix(j: int, f, p: Prog, g, total: bool = False, bindings=()) -> VCSet:
    """VCG(f)(i_j; ...; i_n)(g).

    At j = n+1 the suffix is empty and this is {f => g}, the value the
    general formula gives for an empty suffix.  (An empty set there would
    drop the exit obligation of a loop in last position from the loop case
    of the decomposition.)
    """
    _check_suffix(j, p)
    head = _vc(f, wpre_suffix(j, p, g, total), bindings, _tag(total, "pre", f"suffix {j}"))
    return VCSet([head]).update(vc_suffix(j, p, g, total, bindings))


def vcg_prefix(j: int, f, p: Prog, g, total: bool = False, bindings=()) -> VCSet:
    """VCG(f)(i_1; ...; i_j)(g); {f => g} when j = 0."""
    if not 0 <= j <= len(p):
        raise IndexError(f"prefix index {j} outside 0..{len(p)}")
    if j == 0:
        return VCSet([_vc(f, g, bindings, _tag(total, "pre", "prefix 0"))])
    return vcg(f, Prog(p.insts[:j]), g, total, bindings)


def decomposition(j: int, f, p: Prog, g, total: bool = False) -> list:
    """The VC sets whose joint validity is equivalent to VCG(f)(p)(g) when
    i_j is a branch, a probabilistic choice or a loop."""
    inst = p.inst(j)
    if isinstance(inst, (Cond, PChoice)):
        c1, c2 = (inst.then, inst.orelse) if isinstance(inst, Cond) else (inst.left, inst.right)
        w_next = wpre_suffix(j + 1, p, g, total)
        return [
            vc_suffix(j + 1, p, g, total),
            vc(c1, w_next, total),
            vc(c2, w_next, total),
            vcg_prefix(j - 1, f, p, wpre_suffix(j, p, g, total), total),
        ]
    if isinstance(inst, While):
        I, G = inst.invariant, inst.guard
        parts = [
            vcg_suffix(j + 1, guard(X.negate(G), I), p, g, total),
            vcg(guard(G, I), inst.body, I),
            vcg_prefix(j - 1, f, p, wpre_suffix(j, p, g, total), total),
        ]
        if total:
            ann = inst.require_total()
            GT = X.conj(G, ann.term)
            b = LogicalBinding.interval("v0_d", ann.lower, ann.upper)
            v0 = X.Var(b.var)
            parts += [
                vcg(iverson(GT), inst.body, iverson(ann.term), True),
                vcg(
                    E.scale(ann.eps, iverson(X.conj(GT, X.cmp("=", ann.variant, v0)))),
                    inst.body,
                    iverson(X.cmp("<", ann.variant, v0)),
                    True,
                    (b,),
                ),
                VCSet(
                    [
                        _vc(
                            iverson(GT),
                            iverson(
                                X.conj(
                                    X.cmp("<=", X.num(ann.lower), ann.variant),
                                    X.cmp("<=", ann.variant, X.num(ann.upper)),
                                )
                            ),
                            (),
                            "total/loop-variant-bounds",
                        )
                    ]
                ),
            ]
        return parts
    raise ValueError(f"instruction {j} is neither a branch, a choice nor a loop")


# ---------------------------------------------------------------- discharge


class EntailmentChecker:
    """Memoizing ``entails`` over one state space."""

    def __init__(self, space):
        self.space = space
        self._cache: dict = {}
        self.calls = 0

    def __call__(self, lhs, rhs, bindings=()):
        key = (lhs, rhs, tuple(bindings))
        r = self._cache.get(key)
        if r is None:
            self.calls += 1
            r = entails(lhs, rhs, self.space, bindings)
            self._cache[key] = r
        return r


@dataclass
class DischargeEntry:
    vc: VC
    origins: list
    result: object

    @property
    def ok(self):
        return self.result.ok


@dataclass
class DischargeReport:
    entries: list = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return all(e.ok for e in self.entries)

    def __bool__(self):
        return self.valid

    @property
    def failures(self) -> list:
        return [e for e in self.entries if not e.ok]

    def to_json(self):
        return {
            "status": "valid" if self.valid else "invalid",
            "vcs": [
                dict(e.vc.to_json(), origins=e.origins, result=e.result.to_json()) for e in self.entries
            ],
        }

    def format(self, color: bool = False) -> str:
        lines = []
        for e in self.entries:
            verdict = "VALID" if e.ok else ("INVALID" if isinstance(e.result, E.Invalid) else "RANGE")
            if color:
                verdict = ("\x1b[32m" if e.ok else "\x1b[31m") + verdict + "\x1b[0m"
            lines.append(f"{verdict:8} {e.vc}")
            for o in e.origins:
                lines.append(f"         from {o}")
            if not e.ok:
                lines.append("         " + _describe_failure(e.result))
        lines.append("overall: " + ("valid" if self.valid else "invalid"))
        return "\n".join(lines)


def _describe_failure(r) -> str:
    st = ", ".join(f"{k}={X.format_fraction(v)}" for k, v in r.state)
    if isinstance(r, E.Invalid):
        return f"counterexample {st}: lhs {X.format_fraction(r.lhs)} > rhs {X.format_fraction(r.rhs)}"
    return f"{r.side} evaluates to {X.format_fraction(r.value)} outside [0,1] at {st}"


def discharge(vcs: VCSet, space, checker: EntailmentChecker | None = None) -> DischargeReport:
    check = checker or EntailmentChecker(space)
    report = DischargeReport()
    for v in vcs:
        report.entries.append(DischargeEntry(v, vcs.origins(v), check(v.lhs, v.rhs, v.bindings)))
    return report


def report_json(report: DischargeReport) -> str:
    return json.dumps(report.to_json(), indent=2)
