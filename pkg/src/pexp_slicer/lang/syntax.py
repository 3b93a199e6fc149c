"""AST of the probabilistic language: instructions and flat programs."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING, Iterator, Optional

from .exprs import ArithExpr, BoolExpr, _Node

if TYPE_CHECKING:
    from ..expectation import Expectation


class MissingAnnotationError(ValueError):
    pass


class Inst(_Node):
    pass


@dataclass(frozen=True, eq=False)
class Skip(Inst):
    pass


@dataclass(frozen=True, eq=False)
class Assign(Inst):
    var: str
    expr: ArithExpr


@dataclass(frozen=True, eq=False)
class Cond(Inst):
    guard: BoolExpr
    then: "Prog"
    orelse: "Prog"


@dataclass(frozen=True, eq=False)
class PChoice(Inst):
    left: "Prog"
    prob: Fraction
    right: "Prog"

    def __post_init__(self):
        if not 0 <= self.prob <= 1:
            raise ValueError(f"choice probability {self.prob} outside [0,1]")


@dataclass(frozen=True, eq=False)
class TotalLoopAnnotation:
    term: BoolExpr  # T
    variant: ArithExpr  # v
    lower: int
    upper: int
    eps: Fraction

    def __post_init__(self):
        if not 0 < self.eps <= 1:
            raise ValueError(f"eps must lie in (0,1], got {self.eps}")
        if self.lower > self.upper:
            raise ValueError(f"bounds [{self.lower},{self.upper}] are empty")

    def __hash__(self):
        return hash((self.term, self.variant, self.lower, self.upper, self.eps))

    def __eq__(self, other):
        return isinstance(other, TotalLoopAnnotation) and (
            (self.term, self.variant, self.lower, self.upper, self.eps)
            == (other.term, other.variant, other.lower, other.upper, other.eps)
        )


@dataclass(frozen=True, eq=False)
class While(Inst):
    guard: BoolExpr
    invariant: "Expectation"
    total: Optional[TotalLoopAnnotation]
    body: "Prog"

    def require_total(self) -> TotalLoopAnnotation:
        if self.total is None:
            raise MissingAnnotationError(
                "loop lacks @terminates/@variant/@bounds/@eps needed for total correctness"
            )
        return self.total


@dataclass(frozen=True, eq=False)
class Prog(_Node):
    """A non-empty sequence i1; ...; in.  Python indexing is 0-based."""

    insts: tuple

    def __post_init__(self):
        if not isinstance(self.insts, tuple):
            object.__setattr__(self, "insts", tuple(self.insts))
        if not self.insts:
            raise ValueError("a program needs at least one instruction")

    def __len__(self):
        return len(self.insts)

    def __iter__(self) -> Iterator[Inst]:
        return iter(self.insts)

    def __getitem__(self, i):
        return self.insts[i]

    def inst(self, j: int) -> Inst:
        """1-based access, matching the i_j convention."""
        if not 1 <= j <= len(self.insts):
            raise IndexError(f"instruction index {j} outside 1..{len(self.insts)}")
        return self.insts[j - 1]


SKIP = Prog((Skip(),))


def prog(*insts: Inst) -> Prog:
    return Prog(tuple(insts))


def is_loop_free(p: Prog) -> bool:
    return all(_inst_loop_free(i) for i in p)


def _inst_loop_free(i: Inst) -> bool:
    if isinstance(i, While):
        return False
    if isinstance(i, Cond):
        return is_loop_free(i.then) and is_loop_free(i.orelse)
    if isinstance(i, PChoice):
        return is_loop_free(i.left) and is_loop_free(i.right)
    return True


def atomic_count(p: Prog) -> int:
    """Number of instructions counted recursively (compound ones count once)."""
    n = 0
    for i in p:
        n += 1
        for sub in children(i):
            n += atomic_count(sub)
    return n


def children(i: Inst) -> tuple:
    if isinstance(i, Cond):
        return (i.then, i.orelse)
    if isinstance(i, PChoice):
        return (i.left, i.right)
    if isinstance(i, While):
        return (i.body,)
    return ()


def loops(p: Prog) -> Iterator[While]:
    for i in p:
        if isinstance(i, While):
            yield i
        for sub in children(i):
            yield from loops(sub)
