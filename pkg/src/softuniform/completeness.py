"""Total boundedness, principal Cauchy filters, convergence and completeness.

Filters live on the finite set of soft elements of the host, so every filter
is principal and is represented by its generator: the smallest member.
Internally generators are bitmasks over the soft-element enumeration order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .core import SoftElement, SoftRelation, SoftSet, bits, compose, is_subrelation, popcount
from .errors import InternalInconsistency, NonCarrierError, SizeCapError, SoftError
from .grid import SubsetGrid
from .uniformity import UniformityBase, symmetric_root

DEFAULT_FILTER_CAP = 16
DEFAULT_EXACT_COVER_CAP = 256


@dataclass(frozen=True)
class PrincipalFilter:
    """The filter of all sets of soft elements containing ``generator``."""

    host: SoftSet
    generator: frozenset[SoftElement]

    def __post_init__(self):
        if not self.generator:
            raise SoftError("a principal filter needs a nonempty generator")
        for x in self.generator:
            if not self.host.contains(x):
                raise SoftError(f"{x!r} is not a soft element of the host")

    @classmethod
    def of(cls, host: SoftSet, elements: Iterable[SoftElement]) -> "PrincipalFilter":
        return cls(host, frozenset(elements))


class ElementSpace:
    """Soft elements of a host with, per base member, balls as element bitmasks."""

    def __init__(self, B: UniformityBase, relaxed: bool = False, cap: int | None = None):
        B.require_valid(relaxed)
        self.base = B
        self.grid = SubsetGrid(B.host)
        count = B.host.element_count()
        if cap is not None and count > cap:
            raise SizeCapError(f"{count} soft elements exceed the cap of {cap}")
        self.elements = self.grid.elements()
        self.position = {x: i for i, x in enumerate(self.elements)}
        codes = [self.grid.element_code(x) for x in self.elements]
        self.balls = [self._ball_masks(U, codes) for U in B.members]
        close = (1 << len(self.elements)) - 1
        self.close = []
        for i in range(len(self.elements)):
            m = close
            for balls in self.balls:
                m &= balls[i]
            self.close.append(m)
        self._codes = codes
        self._roots: dict[int, tuple[SoftRelation, list[int], bool]] = {}

    def _ball_masks(self, U: SoftRelation, codes: list[int]) -> list[int]:
        out = []
        for x in self.elements:
            ball = self.grid.ball_code(U, x)
            m = 0
            for j, c in enumerate(codes):
                if ball & c == c:
                    m |= 1 << j
            out.append(m)
        return out

    def root(self, u: int) -> tuple[SoftRelation, list[int], bool]:
        """Symmetric root of member ``u``, its balls, and whether ``V∘V ⊆ U`` holds."""
        if u not in self._roots:
            U = self.base.members[u]
            V = symmetric_root(self.base, U)
            if V is None:
                self._roots[u] = (None, [], False)
            else:
                self._roots[u] = (V, self._ball_masks(V, self._codes), is_subrelation(compose(V, V), U))
        return self._roots[u]

    def mask(self, elements: Iterable[SoftElement]) -> int:
        m = 0
        for x in elements:
            m |= 1 << self.position[x]
        return m

    def unmask(self, mask: int) -> list[SoftElement]:
        return [self.elements[i] for i in bits(mask)]

    def is_cauchy_mask(self, gen: int) -> bool:
        return all(gen & ~self.close[i] == 0 for i in bits(gen))

    def limits_mask(self, gen: int) -> int:
        return sum(1 << p for p, c in enumerate(self.close) if gen & ~c == 0)

    def cluster_mask(self, gen: int) -> int:
        out = 0
        for p in range(len(self.elements)):
            if all(balls[p] & gen for balls in self.balls):
                out |= 1 << p
        return out


def _space(B, space, relaxed=False) -> ElementSpace:
    if space is None:
        return ElementSpace(B, relaxed)
    if space.base is not B:
        raise SoftError("element space built for a different base")
    return space


@dataclass
class TotalBoundednessReport:
    verdict: bool
    covers: dict[str, list[SoftElement]]
    minimum: dict[str, int | None]
    exact_covers: dict[str, list[SoftElement]] = field(default_factory=dict)


def _greedy_cover(full: int, balls: list[int]) -> list[int] | None:
    covered, picks = 0, []
    while covered != full:
        best, gain = None, 0
        for i, b in enumerate(balls):
            g = popcount(b & ~covered)
            if g > gain:
                best, gain = i, g
        if best is None:
            return None
        picks.append(best)
        covered |= balls[best]
    return picks


def _exact_cover(full: int, balls: list[int]) -> list[int] | None:
    """Minimum cover by breadth-first search over the covered masks."""
    uniq: dict[int, int] = {}
    for i, b in enumerate(balls):
        uniq.setdefault(b, i)
    if full == 0:
        return []
    seen = {0}
    frontier: dict[int, list[int]] = {0: []}
    while frontier:
        nxt: dict[int, list[int]] = {}
        for cov, picks in frontier.items():
            for b, i in uniq.items():
                c = cov | b
                if c == full:
                    return picks + [i]
                if c not in seen:
                    seen.add(c)
                    nxt[c] = picks + [i]
        frontier = nxt
    return None


def is_totally_bounded(
    B: UniformityBase,
    exact_limit: int = DEFAULT_EXACT_COVER_CAP,
    relaxed: bool = False,
) -> TotalBoundednessReport:
    """For every base member, finitely many balls whose sectionwise union is the host.

    The greedy cover takes the ball adding the most uncovered section points,
    earliest soft element first on ties.  With at most ``exact_limit`` soft
    elements a minimum cover is also found by exhaustive search.
    """
    B.require_valid(relaxed)
    if not B.host.is_carrier:
        raise NonCarrierError("host has an empty section: no soft elements to centre balls on")
    grid = SubsetGrid(B.host)
    elems = grid.elements()
    covers, minimum, exact = {}, {}, {}
    verdict = True
    for name, U in B:
        balls = [grid.ball_code(U, x) for x in elems]
        picks = _greedy_cover(grid.full, balls)
        if picks is None:
            verdict = False
            covers[name] = []
            minimum[name] = None
            continue
        covers[name] = [elems[i] for i in picks]
        if len(elems) <= exact_limit:
            best = _exact_cover(grid.full, balls)
            minimum[name] = len(best)
            exact[name] = [elems[i] for i in best]
        else:
            minimum[name] = None
    return TotalBoundednessReport(verdict, covers, minimum, exact)


def is_cauchy(B: UniformityBase, phi: PrincipalFilter, relaxed: bool = False) -> bool:
    """Every pair from the generator is close in every base member.

    The generator is the smallest filter member, and every entourage contains
    a base member, so base members and the generator are enough.
    """
    B.require_valid(relaxed)
    for U in B.members:
        for x in phi.generator:
            for y in phi.generator:
                if not all(U.holds(k, a, b) for k, (a, b) in enumerate(zip(x.choice, y.choice))):
                    return False
    return True


def converges_to(B: UniformityBase, phi: PrincipalFilter, p: SoftElement, relaxed: bool = False) -> bool:
    """Every basic ball ``U[p]`` belongs to the filter, i.e. contains the generator."""
    B.require_valid(relaxed)
    if not B.host.contains(p):
        raise SoftError(f"{p!r} is not a soft element of the host")
    return all(
        all(U.holds(k, a, b) for k, (a, b) in enumerate(zip(p.choice, x.choice)))
        for U in B.members
        for x in phi.generator
    )


def cluster_points(B: UniformityBase, phi: PrincipalFilter, space: ElementSpace | None = None) -> list[SoftElement]:
    """Soft elements every basic ball of which meets the generator."""
    S = _space(B, space)
    return S.unmask(S.cluster_mask(S.mask(phi.generator)))


@dataclass
class CompletenessReport:
    verdict: bool
    element_count: int
    cauchy_generators: np.ndarray
    limits: np.ndarray
    space: ElementSpace = field(repr=False)

    @property
    def cauchy_count(self) -> int:
        return int(self.cauchy_generators.size)

    @property
    def failures(self) -> list[list[SoftElement]]:
        return [self.space.unmask(int(g)) for g, l in zip(self.cauchy_generators, self.limits) if l == 0]

    def limit_set(self, phi: PrincipalFilter) -> list[SoftElement]:
        g = self.space.mask(phi.generator)
        hit = np.flatnonzero(self.cauchy_generators == g)
        if not hit.size:
            raise SoftError("filter is not Cauchy")
        return self.space.unmask(int(self.limits[hit[0]]))


def is_complete(
    B: UniformityBase,
    max_elements: int = DEFAULT_FILTER_CAP,
    relaxed: bool = False,
    space: ElementSpace | None = None,
) -> CompletenessReport:
    """Enumerate all ``2^n - 1`` principal filters and check each Cauchy one converges."""
    B.require_valid(relaxed)
    if not B.host.is_carrier:
        raise NonCarrierError("host has an empty section: there are no soft elements")
    n = B.host.element_count()
    if n > max_elements:
        raise SizeCapError(f"{n} soft elements exceed the filter cap of {max_elements}")
    S = _space(B, space, relaxed)
    gens = np.arange(1, 1 << n, dtype=np.int64)
    cauchy = np.ones(gens.size, dtype=bool)
    for i, c in enumerate(S.close):
        has = (gens >> i) & 1 == 1
        cauchy &= ~has | ((gens & ~np.int64(c)) == 0)
    cg = gens[cauchy]
    limits = np.zeros(cg.size, dtype=np.int64)
    for p, c in enumerate(S.close):
        limits |= ((cg & ~np.int64(c)) == 0).astype(np.int64) << p
    return CompletenessReport(bool((limits != 0).all()), n, cg, limits, S)


@dataclass(frozen=True)
class LimitStep:
    entourage: str
    root: SoftRelation = field(repr=False)
    anchor: SoftElement
    root_squares_inside: bool
    anchor_near_limit: bool
    anchor_near_generator: bool
    generator_in_ball: bool

    @property
    def ok(self) -> bool:
        return (
            self.root_squares_inside
            and self.anchor_near_limit
            and self.anchor_near_generator
            and self.generator_in_ball
        )


@dataclass(frozen=True)
class LimitTrace:
    """Why a Cauchy filter converges to ``limit``, one step per base member."""

    generator: tuple[SoftElement, ...]
    limit: SoftElement
    steps: tuple[LimitStep, ...]

    @property
    def verified(self) -> bool:
        return all(s.ok for s in self.steps)

    def to_dict(self) -> dict:
        return {
            "generator": [list(x.names()) for x in self.generator],
            "limit": list(self.limit.names()),
            "verified": self.verified,
            "steps": [
                {
                    "entourage": s.entourage,
                    "anchor": list(s.anchor.names()),
                    "root_squares_inside": s.root_squares_inside,
                    "anchor_near_limit": s.anchor_near_limit,
                    "anchor_near_generator": s.anchor_near_generator,
                    "generator_in_ball": s.generator_in_ball,
                }
                for s in self.steps
            ],
        }


def cauchy_limit_trace(
    B: UniformityBase,
    phi: PrincipalFilter | int,
    space: ElementSpace | None = None,
) -> LimitTrace:
    """Rebuild the convergence argument for a Cauchy filter.

    Pick a cluster point ``p``.  For each member ``U`` take a symmetric ``V``
    with ``V∘V ⊆ U`` and a generator element ``x0`` in ``V[p]``; every
    generator element ``y`` is ``V``-close to ``x0``, so ``(p, y) ∈ V∘V ⊆ U``
    and the generator sits inside ``U[p]``.  Each of these facts is re-checked
    and recorded.  ``phi`` may also be a generator bitmask over ``space``.
    """
    S = _space(B, space)
    gen = int(phi) if isinstance(phi, (int, np.integer)) else S.mask(phi.generator)
    if not S.is_cauchy_mask(gen):
        raise SoftError("filter is not Cauchy")
    clusters = S.cluster_mask(gen)
    if not clusters:
        raise InternalInconsistency("Cauchy filter without a cluster point")
    p = (clusters & -clusters).bit_length() - 1
    steps = []
    for u, name in enumerate(B.names):
        V, vballs, squares = S.root(u)
        if V is None:
            raise InternalInconsistency(f"member {name} has no square root")
        near = gen & vballs[p]
        if not near:
            raise InternalInconsistency("cluster point ball misses the generator")
        x0 = (near & -near).bit_length() - 1
        steps.append(
            LimitStep(
                name,
                V,
                S.elements[x0],
                squares,
                bool(vballs[p] >> x0 & 1),
                gen & ~vballs[x0] == 0,
                gen & ~S.balls[u][p] == 0,
            )
        )
    return LimitTrace(tuple(S.unmask(gen)), S.elements[p], tuple(steps))
