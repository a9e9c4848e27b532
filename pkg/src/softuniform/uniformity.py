"""Soft uniformities represented by finite bases.

A base ``B`` stands for the upward closure ``{U : some member of B ⊆ U}``.
Validation checks the base forms of the diagonal, intersection, inverse and
square-root axioms; upward closure is then automatic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from . import classical
from .core import (
    SoftRelation,
    SoftSet,
    bits,
    compose,
    diagonal,
    inverse,
    is_subrelation,
    meet,
    meet_all,
)
from .errors import MetricError, NotValidatedError, SizeCapError, SoftError


@dataclass(frozen=True)
class Violation:
    """One failed axiom instance.

    ``witnesses`` holds ``(candidate, parameter, pair)`` triples: for every
    member that could have satisfied the axiom, one pair showing it does not.
    For the diagonal axiom the candidate is the member itself and the pair is
    the missing ``(a, a)``.
    """

    axiom: str
    members: tuple[str, ...]
    message: str
    witnesses: tuple[tuple[str, str, tuple[str, str]], ...] = ()

    def to_dict(self) -> dict:
        return {
            "axiom": self.axiom,
            "members": list(self.members),
            "message": self.message,
            "witnesses": [[c, e, list(p)] for c, e, p in self.witnesses],
        }


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def valid(self) -> bool:
        return not self.violations

    def by_axiom(self, axiom: str) -> list[Violation]:
        return [v for v in self.violations if v.axiom == axiom]

    def axiom_ok(self, axiom: str) -> bool:
        return not self.by_axiom(axiom)


class UniformityBase:
    """Finite family of soft relations representing a soft uniformity.

    The validation verdict is computed on first use and cached; the members
    themselves never change.
    """

    def __init__(self, host: SoftSet, members: Sequence[SoftRelation], names: Sequence[str] | None = None):
        members = tuple(members)
        if not members:
            raise SoftError("a uniformity base needs at least one member")
        for m in members:
            if m.host != host:
                raise SoftError("base member on a different soft set")
        if names is None:
            names = tuple(f"B{i + 1}" for i in range(len(members)))
        names = tuple(names)
        if len(names) != len(members) or len(set(names)) != len(names):
            raise SoftError("base member names must be unique, one per member")
        self.host = host
        self.members = members
        self.names = names
        self._report: ValidationReport | None = None

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(zip(self.names, self.members))

    def __repr__(self):
        return f"UniformityBase({list(self.names)}, status={self.status})"

    def name_of(self, U: SoftRelation) -> str:
        for n, m in self:
            if m == U:
                return n
        return "<derived>"

    @property
    def status(self) -> str:
        if self._report is None:
            return "unchecked"
        return "valid" if self._report.valid else "invalid"

    @property
    def report(self) -> ValidationReport:
        if self._report is None:
            self._report = validate_base(self)
        return self._report

    @property
    def is_valid(self) -> bool:
        return self.report.valid

    def require_valid(self, relaxed: bool = False):
        """Raise unless the base is usable.

        In relaxed mode only the diagonal axiom is demanded, so bases lacking
        square roots (or intersections) are allowed through for experiments.
        """
        if relaxed:
            if not self.report.axiom_ok("U1"):
                raise NotValidatedError("relaxed mode still needs every member to contain the diagonal")
            return
        if not self.report.valid:
            first = self.report.violations[0]
            raise NotValidatedError(f"base is not a valid uniformity base ({first.axiom}: {first.message})")

    def smallest(self) -> SoftRelation:
        """Meet of all members; on a valid base this is itself a member of the uniformity."""
        return meet_all(self.members)


def _witness_pair(host: SoftSet, R: SoftRelation, S: SoftRelation) -> tuple[str, tuple[str, str]]:
    """Some ``(e, pair)`` in ``R`` but not in ``S``; callers know one exists."""
    u = host.universe
    for k, (rr, sr) in enumerate(zip(R.rows, S.rows)):
        for i, (a, b) in enumerate(zip(rr, sr)):
            extra = a & ~b
            if extra:
                return host.params[k], (u[i], u[next(bits(extra))])
    raise AssertionError("no witness pair")


def validate_base(B: UniformityBase) -> ValidationReport:
    """Check the four base-form axioms and cache the verdict on ``B``."""
    host = B.host
    D = diagonal(host)
    named = list(B)
    out: list[Violation] = []

    def candidates_fail(target, axiom, members, message, probes):
        if any(is_subrelation(p, target) for p in probes):
            return
        wit = tuple((cname, *_witness_pair(host, p, target)) for (cname, _), p in zip(named, probes))
        out.append(Violation(axiom, members, message, wit))

    plain = [c for _, c in named]
    squares = [compose(c, c) for c in plain]
    for name, U in named:
        if not is_subrelation(D, U):
            e, p = _witness_pair(host, D, U)
            out.append(Violation("U1", (name,), "member does not contain the diagonal", ((name, e, p),)))
    for i, (n1, U1) in enumerate(named):
        for n2, U2 in named[i + 1:]:
            candidates_fail(meet(U1, U2), "U2", (n1, n2), "no member below the intersection", plain)
    for name, U in named:
        candidates_fail(inverse(U), "U3", (name,), "no member below the inverse", plain)
    for name, U in named:
        candidates_fail(U, "U4", (name,), "no member V with V∘V inside", squares)
    report = ValidationReport(tuple(out))
    B._report = report
    return report


def member_of(B: UniformityBase, U: SoftRelation, relaxed: bool = False) -> bool:
    """Membership in the represented uniformity: some member lies below ``U``."""
    B.require_valid(relaxed)
    return any(is_subrelation(m, U) for m in B.members)


def symmetric_root(B: UniformityBase, U: SoftRelation) -> SoftRelation | None:
    """A symmetric ``V`` in the uniformity with ``V∘V ⊆ U``, or None.

    Takes the first member ``W`` with ``W∘W ⊆ U`` and returns ``W ∩ W⁻¹``;
    that meet is in the uniformity whenever the base is valid.
    """
    for m in B.members:
        if is_subrelation(compose(m, m), U):
            return meet(m, inverse(m))
    return None


class UniformityError(SoftError):
    def __init__(self, message: str, base: UniformityBase):
        super().__init__(message)
        self.base = base
        self.report = base.report


def saturate(
    relations: Sequence[SoftRelation],
    names: Sequence[str] | None = None,
    strict: bool = True,
    max_members: int | None = None,
) -> UniformityBase:
    """Close a family under pairwise meet and inverse, then validate.

    Square roots are checked, never manufactured.  With ``strict`` an invalid
    result raises :class:`UniformityError` carrying the report; otherwise the
    invalid base is returned with its report cached.  A closure growing
    past ``max_members`` raises :class:`SizeCapError` before validation.
    """
    relations = list(relations)
    if not relations:
        raise SoftError("saturate needs at least one relation")
    host = relations[0].host
    if names is None:
        names = [f"R{i + 1}" for i in range(len(relations))]
    D = diagonal(host)
    members: list[SoftRelation] = []
    labels: list[str] = []
    seen: dict[SoftRelation, int] = {}

    def add(R, label):
        if R not in seen:
            seen[R] = len(members)
            members.append(R)
            labels.append(label)

    for R, n in zip(relations, names):
        if R.host != host:
            raise SoftError("relations on different soft sets")
        if not is_subrelation(D, R):
            e, p = _witness_pair(host, D, R)
            raise SoftError(f"relation {n!r} misses diagonal pair {p} at parameter {e!r}")
        add(R, n)
    done = 0
    while done < len(members):
        # pairs (i, done) for i <= done are handled when `done` is processed
        R, label = members[done], labels[done]
        add(inverse(R), f"inv({label})")
        for j in range(done):
            add(meet(members[j], R), f"meet({labels[j]},{label})")
        done += 1
        if max_members is not None and len(members) > max_members:
            raise SizeCapError(f"saturation exceeds {max_members} members")
    base = UniformityBase(host, members, labels)
    report = validate_base(base)
    if strict and not report.valid:
        rootless = sorted({n for v in report.by_axiom("U4") for n in v.members})
        raise UniformityError(f"saturated family lacks square roots for {rootless}", base)
    return base


def discrete_uniformity(F: SoftSet) -> UniformityBase:
    B = UniformityBase(F, [diagonal(F)], ["diagonal"])
    validate_base(B)
    return B


def full_uniformity(F: SoftSet) -> UniformityBase:
    """The coarsest uniformity, generated by ``F(e) × F(e)`` at every parameter."""
    B = UniformityBase(F, [SoftRelation.full(F)], ["full"])
    validate_base(B)
    return B


def parse_rational(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool) or isinstance(value, float):
        raise SoftError(f"rationals must be integers or 'p/q' strings, got {value!r}")
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError, TypeError):
        raise SoftError(f"bad rational {value!r}") from None


def format_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class MetricFamily:
    """One finite metric per parameter, on that parameter's section.

    ``dist[k]`` maps ordered index pairs ``(i, j)`` of section ``k`` to exact
    rationals.  The metric axioms are checked exhaustively on construction.
    """

    host: SoftSet
    dist: tuple[Mapping[tuple[int, int], Fraction], ...] = field(repr=False)

    def __post_init__(self):
        u = self.host.universe
        for k, (sec, d) in enumerate(zip(self.host.masks, self.dist)):
            e = self.host.params[k]
            pts = list(bits(sec))
            for i in pts:
                for j in pts:
                    if (i, j) not in d:
                        raise MetricError(f"distance {u[i]}-{u[j]} missing at parameter {e!r}")
                    v = d[(i, j)]
                    if i == j and v != 0:
                        raise MetricError(f"d({u[i]},{u[i]}) = {v} at parameter {e!r}")
                    if i != j and v <= 0:
                        raise MetricError(f"d({u[i]},{u[j]}) = {v} is not positive at parameter {e!r}")
                    if d[(j, i)] != v:
                        raise MetricError(f"d is not symmetric on {u[i]},{u[j]} at parameter {e!r}")
            for i in pts:
                for j in pts:
                    for m in pts:
                        if d[(i, m)] > d[(i, j)] + d[(j, m)]:
                            raise MetricError(
                                f"triangle inequality fails for {u[i]},{u[j]},{u[m]} at parameter {e!r}"
                            )

    @classmethod
    def from_triples(cls, host: SoftSet, triples: Mapping[str, Iterable[Sequence]]) -> "MetricFamily":
        u = host.universe
        extra = set(triples) - set(host.params)
        if extra:
            raise MetricError(f"metric for undeclared parameter {sorted(extra)[0]!r}")
        dist = []
        for k, e in enumerate(host.params):
            d: dict[tuple[int, int], Fraction] = {(i, i): Fraction(0) for i in bits(host.masks[k])}
            for x, y, v in triples.get(e, ()):
                i, j = u.index(x), u.index(y)
                if not (host.masks[k] >> i & 1 and host.masks[k] >> j & 1):
                    raise MetricError(f"metric pair ({x}, {y}) outside section {e!r}")
                q = parse_rational(v)
                for key in ((i, j), (j, i)):
                    if key in d and d[key] != q:
                        raise MetricError(f"conflicting distances for ({x}, {y}) at parameter {e!r}")
                    d[key] = q
            dist.append(d)
        return cls(host, tuple(dist))

    def ball_relation(self, eps: Fraction) -> SoftRelation:
        """``H_eps(e) = {(x, y) : d_e(x, y) < eps}``."""
        n = len(self.host.universe)
        rows = []
        for d in self.dist:
            r = [0] * n
            for (i, j), v in d.items():
                if v < eps:
                    r[i] |= 1 << j
            rows.append(tuple(r))
        return SoftRelation(self.host, tuple(rows))

    def positive_distances(self) -> list[Fraction]:
        return sorted({v for d in self.dist for v in d.values() if v > 0})


def metric_uniformity(M: MetricFamily, epsilons: Sequence) -> UniformityBase:
    """Base of threshold relations ``H_eps`` for a finite grid of radii.

    Radii are halved until every member has a square root among the members;
    halving eventually drops below the smallest positive distance, where the
    threshold relation is the diagonal and is its own root.
    """
    eps = sorted({parse_rational(v) for v in epsilons}, reverse=True)
    if not eps:
        raise SoftError("at least one radius is required")
    if eps[-1] <= 0:
        raise SoftError("radii must be strictly positive")
    grid = list(eps)
    i = 0
    while i < len(grid):
        target = M.ball_relation(grid[i])
        if not any(is_subrelation(compose(H, H), target) for H in map(M.ball_relation, grid)):
            half = grid[i] / 2
            if half not in grid:
                grid.append(half)
                grid.sort(reverse=True)
                i = 0
                continue
        i += 1
    members, names = [], []
    for r in grid:
        H = M.ball_relation(r)
        if H not in members:
            members.append(H)
            names.append(f"H({format_rational(r)})")
    B = UniformityBase(M.host, members, names)
    report = validate_base(B)
    if not report.valid:
        raise AssertionError(f"metric base failed validation: {report.violations[0]}")
    return B


def slice_base(B: UniformityBase, e: str) -> classical.ClassicalBase:
    """The crisp base ``{U(e) : U in B}`` on the section ``F(e)``."""
    k = B.host.params.index(e)
    pts = B.host.universe.names(B.host.masks[k])
    members = []
    for U in B.members:
        members.append(frozenset(U.pairs(e)))
    # duplicates are harmless for the classical validator but noisy in reports
    uniq = tuple(dict.fromkeys(members))
    return classical.ClassicalBase(pts, uniq)
