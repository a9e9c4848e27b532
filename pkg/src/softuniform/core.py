"""Soft sets, soft elements and the soft relation algebra.

Everything here is immutable.  Sections are stored as integer bitmasks over
the universe order; a relation is stored per parameter as a tuple of row
masks, ``rows[e][i]`` being the set of ``j`` with ``(i, j)`` in ``R(e)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import HostMismatchError, InternalInconsistency, SizeCapError, SoftError

DEFAULT_ELEMENT_CAP = 10**6


def bits(mask: int) -> Iterator[int]:
    """Yield the set bit positions of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def popcount(mask: int) -> int:
    return bin(mask).count("1")


class _Atoms:
    kind = "atom"

    def __init__(self, names: Iterable[str]):
        names = tuple(str(n) for n in names)
        if not names:
            raise SoftError(f"{self.kind} list must be nonempty")
        index = {}
        for i, n in enumerate(names):
            if n in index:
                raise SoftError(f"duplicate {self.kind} {n!r}")
            index[n] = i
        self._names = names
        self._index = index

    @property
    def elements(self) -> tuple[str, ...]:
        return self._names

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise SoftError(f"unknown {self.kind} {name!r}") from None

    def __contains__(self, name) -> bool:
        return name in self._index

    def __len__(self) -> int:
        return len(self._names)

    def __iter__(self):
        return iter(self._names)

    def __getitem__(self, i: int) -> str:
        return self._names[i]

    def __eq__(self, other):
        return type(other) is type(self) and other._names == self._names

    def __hash__(self):
        return hash((type(self).__name__, self._names))

    def __repr__(self):
        return f"{type(self).__name__}({list(self._names)!r})"


class Universe(_Atoms):
    """Ordered finite set of atoms; the order is used for all canonical output."""

    kind = "universe element"

    def mask(self, names: Iterable[str]) -> int:
        m = 0
        for n in names:
            m |= 1 << self.index(n)
        return m

    def names(self, mask: int) -> tuple[str, ...]:
        return tuple(self._names[i] for i in bits(mask))


class ParameterSet(_Atoms):
    kind = "parameter"

    @property
    def parameters(self) -> tuple[str, ...]:
        return self._names


@dataclass(frozen=True)
class SoftSet:
    """A parameter-indexed family of subsets of the universe."""

    universe: Universe
    params: ParameterSet
    masks: tuple[int, ...]

    def __post_init__(self):
        if len(self.masks) != len(self.params):
            raise SoftError("one section per parameter is required")
        full = (1 << len(self.universe)) - 1
        for m in self.masks:
            if m < 0 or m & ~full:
                raise SoftError("section outside the universe")

    @classmethod
    def from_sections(
        cls,
        universe: Universe,
        params: ParameterSet,
        sections: Mapping[str, Iterable[str]],
    ) -> "SoftSet":
        extra = set(sections) - set(params)
        if extra:
            raise SoftError(f"section for undeclared parameter {sorted(extra)[0]!r}")
        masks = []
        for e in params:
            if e not in sections:
                raise SoftError(f"missing section for parameter {e!r}")
            masks.append(universe.mask(sections[e]))
        return cls(universe, params, tuple(masks))

    @classmethod
    def empty_like(cls, other: "SoftSet") -> "SoftSet":
        return cls(other.universe, other.params, (0,) * len(other.params))

    def section(self, e: str) -> tuple[str, ...]:
        return self.universe.names(self.masks[self.params.index(e)])

    def sections(self) -> dict[str, tuple[str, ...]]:
        return {e: self.universe.names(m) for e, m in zip(self.params, self.masks)}

    @property
    def is_carrier(self) -> bool:
        """True when every section is nonempty, i.e. soft elements exist."""
        return all(self.masks)

    @property
    def is_empty(self) -> bool:
        return not any(self.masks)

    def _check_compatible(self, other: "SoftSet"):
        if other.universe != self.universe or other.params != self.params:
            raise HostMismatchError("soft sets over different universes or parameters")

    def issubset(self, other: "SoftSet") -> bool:
        self._check_compatible(other)
        return all(a & ~b == 0 for a, b in zip(self.masks, other.masks))

    def union(self, other: "SoftSet") -> "SoftSet":
        self._check_compatible(other)
        return SoftSet(self.universe, self.params, tuple(a | b for a, b in zip(self.masks, other.masks)))

    def intersection(self, other: "SoftSet") -> "SoftSet":
        self._check_compatible(other)
        return SoftSet(self.universe, self.params, tuple(a & b for a, b in zip(self.masks, other.masks)))

    def difference(self, other: "SoftSet") -> "SoftSet":
        """Sectionwise ``self(e) - other(e)``; the complement when ``self`` is the host."""
        self._check_compatible(other)
        return SoftSet(self.universe, self.params, tuple(a & ~b for a, b in zip(self.masks, other.masks)))

    def is_disjoint(self, other: "SoftSet") -> bool:
        """Sectionwise empty intersection."""
        self._check_compatible(other)
        return all(a & b == 0 for a, b in zip(self.masks, other.masks))

    def contains(self, x: "SoftElement") -> bool:
        """``x ∈_s self``: every choice of ``x`` lies in the matching section."""
        if x.universe != self.universe or x.params != self.params:
            return False
        return all(m >> c & 1 for m, c in zip(self.masks, x.choice))

    __contains__ = contains

    def element_count(self) -> int:
        n = 1
        for m in self.masks:
            n *= popcount(m)
        return n

    def __repr__(self):
        body = ", ".join(f"{e}: {{{','.join(s)}}}" for e, s in self.sections().items())
        return f"SoftSet({body})"


@dataclass(frozen=True)
class SoftElement:
    """A choice function ``e -> x(e)``; equality is extensional on the choices."""

    host: SoftSet = field(compare=False, repr=False)
    choice: tuple[int, ...]

    def __post_init__(self):
        if len(self.choice) != len(self.host.params):
            raise SoftError("one choice per parameter is required")
        for m, c in zip(self.host.masks, self.choice):
            if not m >> c & 1:
                raise SoftError("choice outside its section")

    @classmethod
    def from_names(cls, host: SoftSet, choice: Mapping[str, str] | Sequence[str]) -> "SoftElement":
        if isinstance(choice, Mapping):
            names = [choice[e] for e in host.params]
        else:
            names = list(choice)
        return cls(host, tuple(host.universe.index(n) for n in names))

    @property
    def universe(self) -> Universe:
        return self.host.universe

    @property
    def params(self) -> ParameterSet:
        return self.host.params

    def value(self, e: str) -> str:
        return self.universe[self.choice[self.params.index(e)]]

    def names(self) -> tuple[str, ...]:
        return tuple(self.universe[c] for c in self.choice)

    def as_soft_set(self) -> SoftSet:
        """The pointwise singleton soft set ``e -> {x(e)}``."""
        return SoftSet(self.universe, self.params, tuple(1 << c for c in self.choice))

    def __repr__(self):
        return "(" + ",".join(self.names()) + ")"


def enumerate_soft_elements(F: SoftSet, cap: int = DEFAULT_ELEMENT_CAP) -> list[SoftElement]:
    """All soft elements of ``F`` in lexicographic (parameter, universe) order."""
    count = F.element_count()
    if count > cap:
        raise SizeCapError(f"{count} soft elements exceed the cap of {cap}")
    choices = [list(bits(m)) for m in F.masks]
    return [SoftElement(F, c) for c in itertools.product(*choices)]


@dataclass(frozen=True)
class SoftRelation:
    """Parameter-indexed family of relations ``R(e) ⊆ F(e) × F(e)``."""

    host: SoftSet
    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = len(self.host.universe)
        if len(self.rows) != len(self.host.params):
            raise SoftError("one relation per parameter is required")
        for e, (sec, rows) in enumerate(zip(self.host.masks, self.rows)):
            if len(rows) != n:
                raise SoftError("relation rows must span the universe")
            for i, r in enumerate(rows):
                if r and (not sec >> i & 1 or r & ~sec):
                    j = next(bits(r if not sec >> i & 1 else r & ~sec))
                    u = self.host.universe
                    raise SoftError(
                        f"pair ({u[i]!r}, {u[j]!r}) outside the square of section "
                        f"{self.host.params[e]!r}"
                    )

    @classmethod
    def from_pairs(cls, host: SoftSet, graph: Mapping[str, Iterable[Sequence[str]]]) -> "SoftRelation":
        u, params = host.universe, host.params
        extra = set(graph) - set(params)
        if extra:
            raise SoftError(f"relation graph for undeclared parameter {sorted(extra)[0]!r}")
        rows = []
        for e in params:
            r = [0] * len(u)
            for a, b in graph.get(e, ()):
                r[u.index(a)] |= 1 << u.index(b)
            rows.append(tuple(r))
        return cls(host, tuple(rows))

    @classmethod
    def empty(cls, host: SoftSet) -> "SoftRelation":
        n = len(host.universe)
        return cls(host, tuple((0,) * n for _ in host.params))

    @classmethod
    def full(cls, host: SoftSet) -> "SoftRelation":
        n = len(host.universe)
        return cls(host, tuple(tuple(m if m >> i & 1 else 0 for i in range(n)) for m in host.masks))

    def pairs(self, e: str) -> tuple[tuple[str, str], ...]:
        u = self.host.universe
        rows = self.rows[self.host.params.index(e)]
        return tuple((u[i], u[j]) for i, r in enumerate(rows) for j in bits(r))

    def graph(self) -> dict[str, tuple[tuple[str, str], ...]]:
        return {e: self.pairs(e) for e in self.host.params}

    def holds(self, k: int, i: int, j: int) -> bool:
        """``(i, j) ∈ R(e_k)`` with universe indices."""
        return bool(self.rows[k][i] >> j & 1)

    def size(self) -> int:
        return sum(popcount(r) for rows in self.rows for r in rows)

    def _check_host(self, other: "SoftRelation"):
        if other.host != self.host:
            raise HostMismatchError("relations live on different soft sets")

    def __repr__(self):
        body = "; ".join(
            f"{e}: " + " ".join(f"{a}{b}" for a, b in self.pairs(e)) for e in self.host.params
        )
        return f"SoftRelation({body})"


def diagonal(F: SoftSet) -> SoftRelation:
    n = len(F.universe)
    return SoftRelation(F, tuple(tuple((1 << i) & m for i in range(n)) for m in F.masks))


def _transpose(rows: tuple[int, ...]) -> tuple[int, ...]:
    out = [0] * len(rows)
    for i, r in enumerate(rows):
        for j in bits(r):
            out[j] |= 1 << i
    return tuple(out)


def inverse(R: SoftRelation) -> SoftRelation:
    return SoftRelation(R.host, tuple(_transpose(rows) for rows in R.rows))


def _compose_rows(r_rows: tuple[int, ...], s_rows: tuple[int, ...]) -> tuple[int, ...]:
    out = []
    for srow in s_rows:
        acc = 0
        for y in bits(srow):
            acc |= r_rows[y]
        out.append(acc)
    return tuple(out)


def compose(R: SoftRelation, S: SoftRelation) -> SoftRelation:
    """``R ∘ S``: apply ``S`` first, then ``R``.

    ``(x, z) ∈ (R∘S)(e)`` iff some ``y`` has ``(x, y) ∈ S(e)`` and ``(y, z) ∈ R(e)``.
    """
    R._check_host(S)
    return SoftRelation(R.host, tuple(_compose_rows(r, s) for r, s in zip(R.rows, S.rows)))


def meet(R: SoftRelation, S: SoftRelation) -> SoftRelation:
    R._check_host(S)
    return SoftRelation(
        R.host, tuple(tuple(a & b for a, b in zip(r, s)) for r, s in zip(R.rows, S.rows))
    )


def join(R: SoftRelation, S: SoftRelation) -> SoftRelation:
    R._check_host(S)
    return SoftRelation(
        R.host, tuple(tuple(a | b for a, b in zip(r, s)) for r, s in zip(R.rows, S.rows))
    )


def is_subrelation(R: SoftRelation, S: SoftRelation) -> bool:
    R._check_host(S)
    return all(a & ~b == 0 for r, s in zip(R.rows, S.rows) for a, b in zip(r, s))


def meet_all(relations: Iterable[SoftRelation]) -> SoftRelation:
    it = iter(relations)
    acc = next(it)
    for R in it:
        acc = meet(acc, R)
    return acc


@dataclass(frozen=True)
class RelationProperties:
    reflexive: dict[str, bool]
    symmetric: dict[str, bool]
    transitive: dict[str, bool]

    def everywhere(self, prop: str) -> bool:
        return all(getattr(self, prop).values())


def _direct_properties(R: SoftRelation, k: int) -> tuple[bool, bool, bool]:
    sec = list(bits(R.host.masks[k]))
    pairs = {(i, j) for i in sec for j in sec if R.holds(k, i, j)}
    refl = all((i, i) in pairs for i in sec)
    sym = all((j, i) in pairs for i, j in pairs)
    trans = all((i, l) in pairs for i, j in pairs for jj, l in pairs if j == jj)
    return refl, sym, trans


def relation_properties(R: SoftRelation) -> RelationProperties:
    """Reflexivity, symmetry and transitivity per parameter.

    Each property is computed by quantifying over pairs and again through the
    relation-algebra characterisations (``Δ ⊆ R``, ``R = R⁻¹``, ``R∘R ⊆ R``).
    A disagreement is an implementation bug and raises.
    """
    D, Rinv, RR = diagonal(R.host), inverse(R), compose(R, R)
    out = {"reflexive": {}, "symmetric": {}, "transitive": {}}
    for k, e in enumerate(R.host.params):
        direct = _direct_properties(R, k)
        algebraic = (
            all(d & ~r == 0 for d, r in zip(D.rows[k], R.rows[k])),
            Rinv.rows[k] == R.rows[k],
            all(a & ~b == 0 for a, b in zip(RR.rows[k], R.rows[k])),
        )
        if direct != algebraic:
            raise InternalInconsistency(
                f"relation properties disagree at parameter {e!r}: {direct} vs {algebraic}"
            )
        out["reflexive"][e], out["symmetric"][e], out["transitive"][e] = direct
    return RelationProperties(**out)
