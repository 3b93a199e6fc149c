"""Ground-truth wp / wlp over a finite state space, and a sampler.

Programs are run forward: every fragment maps a start state to a
sub-distribution over final states plus a non-termination mass.  Then

    wp(c)(g)(s)  = sum_t K(s, t) * g(t)
    wlp(c)(g)(s) = wp(c)(g)(s) + N(s)

Loop-free fragments are exact rationals and may pass through states outside
the declared domains.  A loop is solved once per call over the whole space:
its exit kernel by ascending value iteration from 0, its non-termination
mass by descending iteration from 1.  Those results are floats and the
table is flagged inexact.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

from .expectation import Expectation, ExpectationRangeError, evaluate
from .lang.exprs import eval_arith, eval_bool, format_bool, format_fraction
from .lang.state import State, StateSpace, state_update
from .lang.syntax import Assign, Cond, PChoice, Prog, Skip, While

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 100_000


class DomainEscapeError(RuntimeError):
    """A loop was entered, or its body left, outside the declared domains."""


class NonConvergenceError(RuntimeError):
    pass


@dataclass
class TabulatedExpectation:
    space: StateSpace
    values: list
    exact: bool
    iterations: int = 0

    def __getitem__(self, s: Mapping):
        return self.values[self.space.index(s)]

    def items(self):
        return zip(self.space.enumerate(), self.values)

    def to_csv(self) -> str:
        names = self.space.variables
        rows = [",".join(names + ["value"])]
        for s, v in self.items():
            cells = [format_fraction(s[n]) for n in names]
            cells.append(format_fraction(v) if isinstance(v, Fraction) else repr(float(v)))
            rows.append(",".join(cells))
        return "\n".join(rows) + "\n"


@dataclass
class _LoopSolution:
    index: dict  # State -> row
    states: list
    kernel: np.ndarray  # exit probabilities, row = start, col = exit state
    nonterm: np.ndarray
    iterations: int


@dataclass
class _Run:
    space: StateSpace
    tol: float
    max_iter: int
    loops: dict = field(default_factory=dict)
    inexact: bool = False
    iterations: int = 0

    # -- forward execution -------------------------------------------------

    def run(self, p: Prog, s: State):
        dist = {s: Fraction(1)}
        lost = Fraction(0)
        for inst in p:
            nxt: dict = {}
            for t, w in dist.items():
                d, n = self.step(inst, t)
                lost += w * n
                for u, q in d.items():
                    nxt[u] = nxt.get(u, 0) + w * q
            dist = {u: q for u, q in nxt.items() if q}
        return dist, lost

    def step(self, inst, s: State):
        if isinstance(inst, Skip):
            return {s: Fraction(1)}, Fraction(0)
        if isinstance(inst, Assign):
            return {state_update(s, inst.var, eval_arith(inst.expr, s)): Fraction(1)}, Fraction(0)
        if isinstance(inst, Cond):
            return self.run(inst.then if eval_bool(inst.guard, s) else inst.orelse, s)
        if isinstance(inst, PChoice):
            p = inst.prob
            d1, n1 = self.run(inst.left, s) if p else ({}, 0)
            d2, n2 = self.run(inst.right, s) if p != 1 else ({}, 0)
            out = {}
            for d, w in ((d1, p), (d2, 1 - p)):
                for u, q in d.items():
                    out[u] = out.get(u, 0) + w * q
            return out, p * n1 + (1 - p) * n2
        if isinstance(inst, While):
            sol = self.solve(inst)
            if s not in sol.index:
                raise DomainEscapeError(f"state {_show(s)} reaches `{_head(inst)}` outside the declared domains")
            row = sol.index[s]
            ks = sol.kernel[row]
            out = {sol.states[c]: float(ks[c]) for c in np.nonzero(ks)[0]}
            return out, float(sol.nonterm[row])
        raise TypeError(f"not an instruction: {inst!r}")

    # -- loops --------------------------------------------------------------

    def solve(self, w: While) -> _LoopSolution:
        sol = self.loops.get(id(w))
        if sol is not None:
            return sol
        self.inexact = True
        states = [self.space.restrict(s) for s in self.space.enumerate()]
        index = {s: i for i, s in enumerate(states)}
        n = len(states)
        body = np.zeros((n, n))
        body_lost = np.zeros(n)
        guard = np.zeros(n, dtype=bool)
        for i, s in enumerate(states):
            if not eval_bool(w.guard, s):
                continue
            guard[i] = True
            d, lost = self.run(w.body, s)
            body_lost[i] = float(lost)
            for t, q in d.items():
                j = index.get(t)
                if j is None:
                    raise DomainEscapeError(
                        f"body of `{_head(w)}` moves {_show(s)} to {_show(t)}, outside the declared domains"
                    )
                body[i, j] += float(q)
        G = guard[:, None] * body
        exit_ = np.diag((~guard).astype(float))

        # least fixpoint of X = exit + G X
        X = np.zeros((n, n))
        it = 0
        while True:
            it += 1
            nxt = exit_ + G @ X
            delta = np.max(np.abs(nxt - X)) if n else 0.0
            X = nxt
            if delta < self.tol:
                break
            if it >= self.max_iter:
                raise NonConvergenceError(f"`{_head(w)}`: no convergence after {it} iterations (last change {delta:.3g})")

        # greatest fixpoint of N = [G](B N + lost_B)
        N = np.ones(n)
        it2 = 0
        while True:
            it2 += 1
            nxt = guard * (body @ N + body_lost)
            delta = np.max(np.abs(nxt - N)) if n else 0.0
            N = nxt
            if delta < self.tol:
                break
            if it2 >= self.max_iter:
                raise NonConvergenceError(f"`{_head(w)}`: no convergence after {it2} iterations (last change {delta:.3g})")
        self.iterations = max(self.iterations, it, it2)
        sol = _LoopSolution(index, states, X, N, max(it, it2))
        self.loops[id(w)] = sol
        return sol


def _head(w: While) -> str:
    return f"while ({format_bool(w.guard)})"


def _show(s: Mapping) -> str:
    return "{" + ", ".join(f"{k}={format_fraction(v)}" for k, v in s.items()) + "}"


def _tabulate(p: Prog, g: Expectation, space: StateSpace, tol, max_iter, liberal: bool) -> TabulatedExpectation:
    run = _Run(space, float(tol), int(max_iter))
    values = []
    memo_g: dict = {}
    for s in space.enumerate():
        dist, lost = run.run(p, s)
        total = lost if liberal else 0
        for t, w in dist.items():
            gv = memo_g.get(t)
            if gv is None:
                gv = evaluate(g, t, check_range=False)
                if not 0 <= gv <= 1:
                    raise ExpectationRangeError(t, gv)
                memo_g[t] = gv
            total = total + w * gv
        values.append(total)
    if run.inexact:
        values = [float(v) for v in values]
    else:
        values = [Fraction(v) for v in values]
    return TabulatedExpectation(space, values, exact=not run.inexact, iterations=run.iterations)


def wp_eval(p: Prog, g: Expectation, space: StateSpace, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Weakest pre-expectation of ``g``, tabulated over ``space``."""
    return _tabulate(p, g, space, tol, max_iter, liberal=False)


def wlp_eval(p: Prog, g: Expectation, space: StateSpace, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Weakest liberal pre-expectation of ``g``, tabulated over ``space``."""
    return _tabulate(p, g, space, tol, max_iter, liberal=True)


# ------------------------------------------------------------------ sampler


class Simulation(Counter):
    """Final-state counts of completed runs; ``censored`` counts capped runs."""

    censored: int = 0


_DENOM_BITS = 53


def simulate(p: Prog, s: Mapping, n: int, seed: int, step_cap: int = 10_000) -> Simulation:
    """Run ``p`` from ``s`` ``n`` times with ``random.Random(seed)``.

    A choice [q] goes left when a uniform rational u in [0, 1) with 53 random
    bits satisfies u < q, compared exactly.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = random.Random(seed)
    out = Simulation()
    start = State(s)
    for _ in range(n):
        budget = [step_cap]
        final = _sample(p, start, rng, budget)
        if final is None:
            out.censored += 1
        else:
            out[final] += 1
    return out


def _sample(p: Prog, s: State, rng: random.Random, budget):
    for inst in p:
        budget[0] -= 1
        if budget[0] < 0:
            return None
        if isinstance(inst, Skip):
            continue
        if isinstance(inst, Assign):
            s = state_update(s, inst.var, eval_arith(inst.expr, s))
        elif isinstance(inst, Cond):
            s = _sample(inst.then if eval_bool(inst.guard, s) else inst.orelse, s, rng, budget)
        elif isinstance(inst, PChoice):
            u = Fraction(rng.getrandbits(_DENOM_BITS), 1 << _DENOM_BITS)
            s = _sample(inst.left if u < inst.prob else inst.right, s, rng, budget)
        elif isinstance(inst, While):
            while s is not None and eval_bool(inst.guard, s):
                budget[0] -= 1
                if budget[0] < 0:
                    return None
                s = _sample(inst.body, s, rng, budget)
        if s is None:
            return None
    return s


__all__ = [
    "DEFAULT_MAX_ITER",
    "DEFAULT_TOL",
    "DomainEscapeError",
    "NonConvergenceError",
    "Simulation",
    "TabulatedExpectation",
    "simulate",
    "wlp_eval",
    "wp_eval",
]
