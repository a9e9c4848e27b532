"""A plain classical uniform space on a finite crisp set.

This module is deliberately written without the bitmask machinery used by
the soft modules: points are strings, relations are frozensets of pairs and
every predicate is a direct transcription of its textbook definition.  It is
the reference the soft implementation is compared against for one-parameter
instances and for parameterwise slices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping

Pair = tuple[str, str]
Rel = frozenset


def compose(r: Rel, s: Rel) -> Rel:
    """``r ∘ s``: first ``s``, then ``r``."""
    return frozenset((x, z) for x, y in s for yy, z in r if y == yy)


def inverse(r: Rel) -> Rel:
    return frozenset((y, x) for x, y in r)


def subsets(points: tuple[str, ...]) -> Iterable[frozenset]:
    for k in range(len(points) + 1):
        for c in itertools.combinations(points, k):
            yield frozenset(c)


@dataclass(frozen=True)
class ClassicalBase:
    points: tuple[str, ...]
    members: tuple[Rel, ...]

    def diagonal(self) -> Rel:
        return frozenset((p, p) for p in self.points)

    def ball(self, u: Rel, x: str) -> frozenset:
        return frozenset(y for y in self.points if (x, y) in u)


def validate_base(base: ClassicalBase) -> list[str]:
    """Problems with ``base`` as a uniformity base; empty means valid."""
    problems = []
    pts = set(base.points)
    diag = base.diagonal()
    if not base.members:
        problems.append("empty base")
    for i, u in enumerate(base.members):
        if any(x not in pts or y not in pts for x, y in u):
            problems.append(f"member {i} leaves the point set")
        if not diag <= u:
            problems.append(f"member {i} misses the diagonal")
        if not any(w <= inverse(u) for w in base.members):
            problems.append(f"member {i} has no member below its inverse")
        if not any(compose(w, w) <= u for w in base.members):
            problems.append(f"member {i} has no square root")
        for j, v in enumerate(base.members):
            if not any(w <= (u & v) for w in base.members):
                problems.append(f"members {i},{j} have no member below their intersection")
    return problems


class ClassicalSpace:
    """Topology and uniform properties of a finite classical uniform space."""

    def __init__(self, base: ClassicalBase):
        self.base = base
        self.points = base.points
        self._opens = None

    def is_open(self, o: frozenset) -> bool:
        return all(any(self.base.ball(u, x) <= o for u in self.base.members) for x in o)

    @property
    def opens(self) -> list[frozenset]:
        if self._opens is None:
            self._opens = [o for o in subsets(self.points) if self.is_open(o)]
        return self._opens

    def closed_sets(self) -> list[frozenset]:
        everything = frozenset(self.points)
        return [everything - o for o in self.opens]

    def smallest_open_containing(self, s: frozenset) -> frozenset | None:
        containing = [o for o in self.opens if s <= o]
        inter = frozenset(self.points)
        for o in containing:
            inter &= o
        return inter if inter in set(self.opens) else None

    def is_separated(self) -> bool:
        inter = frozenset(itertools.product(self.points, repeat=2))
        for u in self.base.members:
            inter &= u
        return inter == self.base.diagonal()

    def is_t1(self) -> bool:
        for x, y in itertools.permutations(self.points, 2):
            if not any(x in o and y not in o for o in self.opens):
                return False
        return True

    def is_regular(self) -> bool:
        opens = self.opens
        for c in self.closed_sets():
            for x in self.points:
                if x in c:
                    continue
                ox = self.smallest_open_containing(frozenset([x]))
                oc = self.smallest_open_containing(c)
                if ox is not None and oc is not None:
                    if ox & oc:
                        return False
                    continue
                found = any(
                    x in o1 and c <= o2 and not (o1 & o2) for o1 in opens for o2 in opens
                )
                if not found:
                    return False
        return True

    def is_totally_bounded(self) -> bool:
        # if the balls around all points do not cover, no finite subfamily does
        everything = frozenset(self.points)
        for u in self.base.members:
            covered = frozenset().union(*(self.base.ball(u, x) for x in self.points))
            if covered != everything:
                return False
        return True

    def is_cauchy(self, gen: frozenset) -> bool:
        return all((x, y) in u for u in self.base.members for x in gen for y in gen)

    def converges(self, gen: frozenset, p: str) -> bool:
        # every open neighbourhood of p must belong to the principal filter
        return all(gen <= o for o in self.opens if p in o)

    def is_complete(self) -> bool:
        for gen in subsets(self.points):
            if gen and self.is_cauchy(gen):
                if not any(self.converges(gen, p) for p in self.points):
                    return False
        return True


def is_continuous(f: Mapping[str, str], dom: ClassicalSpace, cod: ClassicalSpace) -> bool:
    dom_opens = set(dom.opens)
    for o in cod.opens:
        pre = frozenset(x for x in dom.points if f[x] in o)
        if pre not in dom_opens:
            return False
    return True


def is_uniformly_continuous(f: Mapping[str, str], dom: ClassicalSpace, cod: ClassicalSpace) -> bool:
    def image(u):
        return frozenset((f[x], f[y]) for x, y in u)

    return all(
        any(image(u) <= v for u in dom.base.members) for v in cod.base.members
    )


def verdicts(space: ClassicalSpace) -> dict[str, bool]:
    return {
        "separated": space.is_separated(),
        "t1": space.is_t1(),
        "regular": space.is_regular(),
        "totally_bounded": space.is_totally_bounded(),
        "complete": space.is_complete(),
    }

