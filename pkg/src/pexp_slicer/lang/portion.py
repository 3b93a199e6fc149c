"""The syntactic is-portion-of relation between programs.

``skip`` is a portion of anything, contiguous spans may be dropped, and the
relation is a congruence for sequencing, both branching forms and loops.
Closing under transitivity means any order-preserving subsequence of
instructions, each replaced by one of its own portions, qualifies; that is
what the matcher below decides.
"""

from __future__ import annotations

from .syntax import Assign, Cond, Inst, PChoice, Prog, Skip, While


def is_portion_of(candidate: Prog, original: Prog) -> bool:
    if len(candidate) == 1 and isinstance(candidate[0], Skip):
        return True
    if candidate == original:
        return True
    j = 0
    n = len(original)
    for c in candidate:
        # earliest match is optimal for order-preserving matching
        while j < n and not _inst_portion(c, original[j]):
            j += 1
        if j == n:
            return False
        j += 1
    return True


def _inst_portion(c: Inst, o: Inst) -> bool:
    if isinstance(c, Skip):
        return True
    if type(c) is not type(o):
        return False
    if isinstance(c, Assign):
        return c == o
    if isinstance(c, Cond):
        return c.guard == o.guard and is_portion_of(c.then, o.then) and is_portion_of(c.orelse, o.orelse)
    if isinstance(c, PChoice):
        return c.prob == o.prob and is_portion_of(c.left, o.left) and is_portion_of(c.right, o.right)
    if isinstance(c, While):
        return (
            c.guard == o.guard
            and c.invariant == o.invariant
            and c.total == o.total
            and is_portion_of(c.body, o.body)
        )
    return False
