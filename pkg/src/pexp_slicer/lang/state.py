"""Finite state spaces.  A state is an immutable total assignment."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping

from .exprs import format_fraction


@dataclass(frozen=True)
class VarDomain:
    var: str
    values: tuple

    def __post_init__(self):
        vals = tuple(Fraction(v) for v in self.values)
        if not vals:
            raise ValueError(f"domain of {self.var} is empty")
        if len(set(vals)) != len(vals):
            raise ValueError(f"domain of {self.var} has duplicate values")
        object.__setattr__(self, "values", vals)


class State(Mapping):
    """Read-only mapping from variable names to rationals, hashable."""

    __slots__ = ("_d", "_h")

    def __init__(self, items=()):
        d = dict(items)
        object.__setattr__(self, "_d", d)
        object.__setattr__(self, "_h", None)

    def __getitem__(self, k):
        return self._d[k]

    def __iter__(self):
        return iter(self._d)

    def __len__(self):
        return len(self._d)

    def __hash__(self):
        if self._h is None:
            object.__setattr__(self, "_h", hash(frozenset(self._d.items())))
        return self._h

    def __eq__(self, other):
        if isinstance(other, State):
            return self._d == other._d
        return isinstance(other, Mapping) and self._d == dict(other)

    def __setattr__(self, k, v):
        raise AttributeError("State is immutable")

    def __repr__(self):
        inner = ", ".join(f"{k}={format_fraction(v)}" for k, v in self._d.items())
        return f"State({inner})"

    def as_dict(self) -> dict:
        return dict(self._d)


def state_update(s: Mapping, x: str, v) -> State:
    """s[x/v]"""
    d = dict(s)
    d[x] = Fraction(v)
    return State(d)


class StateSpace:
    """Declared finite domains, in declaration order."""

    def __init__(self, domains: Mapping[str, VarDomain] | list):
        if isinstance(domains, Mapping):
            doms = list(domains.values())
        else:
            doms = list(domains)
        self.domains: dict[str, VarDomain] = {}
        for d in doms:
            if d.var in self.domains:
                raise ValueError(f"variable {d.var} declared twice")
            self.domains[d.var] = d

    @classmethod
    def of(cls, **values) -> "StateSpace":
        return cls([VarDomain(k, tuple(v)) for k, v in values.items()])

    @property
    def variables(self) -> list[str]:
        return list(self.domains)

    @property
    def size(self) -> int:
        n = 1
        for d in self.domains.values():
            n *= len(d.values)
        return n

    def enumerate(self) -> Iterator[State]:
        names = self.variables
        for combo in itertools.product(*(d.values for d in self.domains.values())):
            yield State(zip(names, combo))

    __iter__ = enumerate

    def __len__(self):
        return self.size

    def __contains__(self, s) -> bool:
        if not isinstance(s, Mapping):
            return False
        return all(k in s and s[k] in d.values for k, d in self.domains.items())

    def index(self, s: Mapping) -> int:
        """Position of ``s`` in enumeration order."""
        i = 0
        for d in self.domains.values():
            i = i * len(d.values) + d.values.index(s[d.var])
        return i

    def restrict(self, s: Mapping) -> State:
        return State((k, s[k]) for k in self.domains)

    def __repr__(self):
        parts = "; ".join(
            f"{k} in {{{', '.join(format_fraction(v) for v in d.values)}}}" for k, d in self.domains.items()
        )
        return f"StateSpace({parts})"
