"""Soft mappings, continuity, uniform continuity and the Lebesgue entourage."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .core import SoftElement, SoftRelation, SoftSet, bits, is_subrelation, meet_all
from .errors import CoverError, HostMismatchError, InternalInconsistency, NotOpenError, SizeCapError, SoftError
from .grid import SubsetGrid
from .topology import (
    DEFAULT_SUBSET_CAP,
    SoftTopology,
    entourage_ball,
    enumerate_topology,
    is_open,
)
from .uniformity import UniformityBase, member_of, symmetric_root


@dataclass(frozen=True)
class SoftMapping:
    """A family of total maps ``f_e : F(e) -> G(e)`` over a shared parameter set.

    ``maps[k]`` sends universe indices of the domain section to universe
    indices of the codomain.
    """

    domain: SoftSet
    codomain: SoftSet
    maps: tuple[tuple[tuple[int, int], ...], ...]
    _lookup: tuple[dict, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.domain.params != self.codomain.params:
            raise HostMismatchError("domain and codomain use different parameter sets")
        if len(self.maps) != len(self.domain.params):
            raise SoftError("one map per parameter is required")
        lookup = []
        for k, pairs in enumerate(self.maps):
            e = self.domain.params[k]
            d = dict(pairs)
            dom, cod = self.domain.masks[k], self.codomain.masks[k]
            if set(d) != set(bits(dom)) or len(d) != len(pairs):
                raise SoftError(f"map at parameter {e!r} is not a function on the whole section")
            for a, b in d.items():
                if not cod >> b & 1:
                    raise SoftError(
                        f"f_{e}({self.domain.universe[a]}) = {self.codomain.universe[b]} "
                        "lies outside the codomain section"
                    )
            lookup.append(d)
        object.__setattr__(self, "_lookup", tuple(lookup))

    @classmethod
    def from_names(
        cls, domain: SoftSet, codomain: SoftSet, maps: Mapping[str, Mapping[str, str]]
    ) -> "SoftMapping":
        extra = set(maps) - set(domain.params)
        if extra:
            raise SoftError(f"map for undeclared parameter {sorted(extra)[0]!r}")
        out = []
        for e in domain.params:
            m = maps.get(e, {})
            pairs = tuple(
                sorted((domain.universe.index(a), codomain.universe.index(b)) for a, b in m.items())
            )
            out.append(pairs)
        return cls(domain, codomain, tuple(out))

    @classmethod
    def identity(cls, F: SoftSet) -> "SoftMapping":
        return cls(F, F, tuple(tuple((a, a) for a in bits(m)) for m in F.masks))

    def at(self, k: int, a: int) -> int:
        return self._lookup[k][a]

    def named_maps(self) -> dict[str, dict[str, str]]:
        du, cu = self.domain.universe, self.codomain.universe
        return {
            e: {du[a]: cu[b] for a, b in pairs} for e, pairs in zip(self.domain.params, self.maps)
        }

    def image_mask(self, k: int, mask: int) -> int:
        out = 0
        for a in bits(mask):
            out |= 1 << self._lookup[k][a]
        return out


def apply(f: SoftMapping, x: SoftElement) -> SoftElement:
    """``(f(x))(e) = f_e(x(e))``."""
    if not f.domain.contains(x):
        raise SoftError(f"{x!r} is not a soft element of the domain")
    return SoftElement(f.codomain, tuple(f.at(k, c) for k, c in enumerate(x.choice)))


def preimage(f: SoftMapping, O: SoftSet) -> SoftSet:
    if not O.issubset(f.codomain):
        raise SoftError("not a soft subset of the codomain")
    masks = []
    for k, (dom, target) in enumerate(zip(f.domain.masks, O.masks)):
        masks.append(sum(1 << a for a in bits(dom) if target >> f.at(k, a) & 1))
    return SoftSet(f.domain.universe, f.domain.params, tuple(masks))


def pushforward_relation(f: SoftMapping, U: SoftRelation) -> SoftRelation:
    """``(f×f)(U)(e) = {(f_e(x), f_e(y)) : (x, y) ∈ U(e)}``."""
    if U.host != f.domain:
        raise HostMismatchError("relation does not live on the domain")
    n = len(f.codomain.universe)
    rows = []
    for k, urows in enumerate(U.rows):
        r = [0] * n
        for a, row in enumerate(urows):
            if row:
                r[f.at(k, a)] |= f.image_mask(k, row)
        rows.append(tuple(r))
    return SoftRelation(f.codomain, tuple(rows))


def compose_mappings(g: SoftMapping, f: SoftMapping) -> SoftMapping:
    """``g ∘ f``: first ``f``, then ``g``."""
    if f.codomain != g.domain:
        raise HostMismatchError("codomain of f is not the domain of g")
    maps = tuple(tuple((a, g.at(k, b)) for a, b in pairs) for k, pairs in enumerate(f.maps))
    return SoftMapping(f.domain, g.codomain, maps)


def _check_bases(f: SoftMapping, B_dom: UniformityBase, B_cod: UniformityBase, relaxed: bool):
    if B_dom.host != f.domain or B_cod.host != f.codomain:
        raise HostMismatchError("bases do not live on the mapping's domain and codomain")
    B_dom.require_valid(relaxed)
    B_cod.require_valid(relaxed)


@dataclass
class ContinuityReport:
    verdict: bool
    pointwise: bool
    topological: bool | None
    method: str
    witness: dict | None = None

    @property
    def agree(self) -> bool:
        return self.topological is None or self.topological == self.pointwise


def _pointwise_continuity(f, B_dom, B_cod) -> tuple[bool, dict | None]:
    grid = SubsetGrid(f.domain)
    K = len(f.domain.params)
    # images[u][k][a]: f_e of the U-row of a
    images = [
        [{a: f.image_mask(k, U.rows[k][a]) for a in bits(f.domain.masks[k])} for k in range(K)]
        for U in B_dom.members
    ]
    for x in grid.elements():
        fx = [f.at(k, c) for k, c in enumerate(x.choice)]
        for vname, V in B_cod:
            target = [V.rows[k][fx[k]] for k in range(K)]
            if not any(
                all(img[k][c] & ~target[k] == 0 for k, c in enumerate(x.choice)) for img in images
            ):
                return False, {"element": list(x.names()), "entourage": vname}
    return True, None


def _preimage_tables(f: SoftMapping, dom: SubsetGrid, cod: SubsetGrid) -> list[np.ndarray]:
    """Per section, codomain local mask -> domain local mask of the preimage."""
    tables = []
    for k in range(len(f.domain.params)):
        cod_pos = {u: i for i, u in enumerate(cod.points[k])}
        # local image position of each domain local point
        img = [cod_pos[f.at(k, u)] for u in dom.points[k]]
        S = np.arange(1 << cod.sizes[k], dtype=np.int64)
        pre = np.zeros_like(S)
        for i, j in enumerate(img):
            pre |= ((S >> j) & 1) << i
        tables.append(pre)
    return tables


def _topological_continuity(f, T_dom: SoftTopology, T_cod: SoftTopology) -> tuple[bool, dict | None]:
    dom, cod = T_dom.grid, T_cod.grid
    tables = _preimage_tables(f, dom, cod)
    codes = T_cod.codes
    pre = np.zeros_like(codes)
    for k, t in enumerate(tables):
        local = (codes >> cod.offsets[k]) & ((1 << cod.sizes[k]) - 1)
        pre |= t[local] << dom.offsets[k]
    ok = T_dom.table[pre]
    if ok.all():
        return True, None
    i = int(np.flatnonzero(~ok)[0])
    O = cod.decode(int(codes[i]))
    return False, {"open": O.sections(), "preimage": dom.decode(int(pre[i])).sections()}


def is_soft_continuous(
    f: SoftMapping,
    B_dom: UniformityBase,
    B_cod: UniformityBase,
    max_subsets: int = DEFAULT_SUBSET_CAP,
    relaxed: bool = False,
    topologies: tuple[SoftTopology, SoftTopology] | None = None,
) -> ContinuityReport:
    """Continuity by the neighbourhood criterion, cross-checked by preimages.

    The neighbourhood criterion: for every soft element ``x`` and codomain
    member ``V`` some domain member ``U`` has ``f(U[x]) ⊆ V[f(x)]``.  When
    both topologies fit under the cap, preimages of all codomain opens are
    tested as well.  Outside relaxed mode a disagreement raises.
    """
    _check_bases(f, B_dom, B_cod, relaxed)
    pointwise, pw_witness = _pointwise_continuity(f, B_dom, B_cod)
    topological, top_witness = None, None
    if topologies is None:
        try:
            topologies = (
                enumerate_topology(B_dom, max_subsets, relaxed),
                enumerate_topology(B_cod, max_subsets, relaxed),
            )
        except SizeCapError:
            topologies = None
    if topologies is not None:
        topological, top_witness = _topological_continuity(f, *topologies)
    if topological is not None and topological != pointwise and not relaxed:
        raise InternalInconsistency(
            f"continuity checkers disagree: neighbourhood={pointwise} preimage={topological}"
        )
    if relaxed and topological is not None:
        verdict, method = topological, "preimage"
        witness = top_witness
    else:
        verdict, method = pointwise, "neighbourhood" if topological is None else "neighbourhood+preimage"
        witness = pw_witness
    return ContinuityReport(verdict, pointwise, topological, method, witness)


@dataclass
class UniformContinuityReport:
    verdict: bool
    witnesses: dict[str, str]
    failing: str | None = None


def is_soft_uniformly_continuous(
    f: SoftMapping,
    B_dom: UniformityBase,
    B_cod: UniformityBase,
    relaxed: bool = False,
) -> UniformContinuityReport:
    """For every codomain member ``V`` find a domain member ``U`` with ``(f×f)(U) ⊆ V``.

    Checking base members of the codomain is enough: pushforward is monotone
    and every entourage contains a base member.
    """
    _check_bases(f, B_dom, B_cod, relaxed)
    pushed = [(n, pushforward_relation(f, U)) for n, U in B_dom]
    witnesses = {}
    for vname, V in B_cod:
        hit = next((n for n, P in pushed if is_subrelation(P, V)), None)
        if hit is None:
            return UniformContinuityReport(False, witnesses, vname)
        witnesses[vname] = hit
    return UniformContinuityReport(True, witnesses)


@dataclass
class CompactnessReport:
    verdict: bool
    reason: str


def is_soft_compact(B: UniformityBase) -> CompactnessReport:
    """Always true: a finite host has finitely many soft subsets, so every
    open cover is already finite."""
    return CompactnessReport(
        True,
        "finite host: the induced topology has finitely many members, so any open cover is finite",
    )


@dataclass
class LebesgueEntourage:
    relation: SoftRelation
    centers: list[SoftElement]
    picks: list[tuple[SoftElement, int, str]]
    verified: bool


def _cover_index(cover_codes: list[int], xc: int) -> int | None:
    for i, c in enumerate(cover_codes):
        if c & xc == xc:
            return i
    return None


def lebesgue_entourage(
    B: UniformityBase,
    cover: Sequence[SoftSet],
    topology: SoftTopology | None = None,
) -> LebesgueEntourage:
    """An entourage ``L`` whose balls each fit inside some member of ``cover``.

    For each soft element ``x`` take the first cover member containing it, a
    base member ``V_x`` whose ball at ``x`` fits inside, and a symmetric
    ``U_x`` with ``U_x∘U_x ⊆ V_x``.  Walking the soft elements in order, the
    centres whose ``U_x``-balls are needed to catch every soft element form a
    finite subcover; ``L`` is the meet of their ``U_x``.

    The cover must be open, its sectionwise union must be the host, and every
    soft element must lie in some member: a union of vacuous opens can equal
    the host while containing no soft element at all, and then no such ``L``
    exists.
    """
    B.require_valid()
    host = B.host
    grid = SubsetGrid(host)
    if not cover:
        raise CoverError("empty cover")
    codes = []
    for i, O in enumerate(cover):
        if topology is not None:
            ok = O in topology
        else:
            ok = is_open(B, O)
        if not ok:
            raise NotOpenError(f"cover member {i} is not open: {O!r}")
        codes.append(grid.code(O))
    union = 0
    for c in codes:
        union |= c
    if union != grid.full:
        raise CoverError("the cover's sectionwise union is not the host")
    elems = grid.elements()
    ecodes = [grid.element_code(x) for x in elems]
    picks, roots = [], []
    root_cache: dict[str, SoftRelation] = {}
    for x, xc in zip(elems, ecodes):
        i = _cover_index(codes, xc)
        if i is None:
            raise CoverError(f"soft element {x!r} lies in no cover member")
        vname = next(
            (n for n, V in B if grid.ball_code(V, x) & ~codes[i] == 0),
            None,
        )
        if vname is None:
            raise InternalInconsistency(f"open cover member {i} has no ball at {x!r}")
        if vname not in root_cache:
            root = symmetric_root(B, B.members[B.names.index(vname)])
            if root is None:
                raise InternalInconsistency(f"member {vname} has no square root")
            root_cache[vname] = root
        picks.append((x, i, vname))
        roots.append(root_cache[vname])
    centers, chosen = [], []
    caught = 0
    index = {xc: j for j, xc in enumerate(ecodes)}
    for j, (x, root) in enumerate(zip(elems, roots)):
        if caught >> j & 1:
            continue
        ball = grid.ball_code(root, x)
        for yc, t in index.items():
            if ball & yc == yc:
                caught |= 1 << t
        centers.append(x)
        chosen.append(root)
    L = meet_all(chosen) if chosen else B.members[0]
    verified = member_of(B, L) and all(
        _cover_index(codes, grid.ball_code(L, x)) is not None for x in elems
    )
    if not verified:
        raise InternalInconsistency("Lebesgue entourage failed its own verification")
    return LebesgueEntourage(L, centers, picks, verified)


@dataclass
class HeineCantorStep:
    target: str
    root: SoftRelation = field(repr=False)
    lebesgue: SoftRelation = field(repr=False)
    contained: bool


@dataclass
class HeineCantorReport:
    continuous: bool
    uniformly_continuous: bool
    steps: list[HeineCantorStep]

    @property
    def holds(self) -> bool:
        return (not self.continuous) or self.uniformly_continuous

    @property
    def chains_verified(self) -> bool:
        return all(s.contained for s in self.steps)


def heine_cantor_check(
    f: SoftMapping,
    B_dom: UniformityBase,
    B_cod: UniformityBase,
    max_subsets: int = DEFAULT_SUBSET_CAP,
    topologies: tuple[SoftTopology, SoftTopology] | None = None,
) -> HeineCantorReport:
    """On a finite (hence compact) domain, continuity should give uniform continuity.

    For a continuous ``f`` and each codomain member ``V`` the argument is
    replayed: a symmetric ``W`` with ``W∘W ⊆ V``, the cover of preimages
    ``f⁻¹(W[f(x)])``, its Lebesgue entourage ``U``, and the containment
    ``(f×f)(U) ⊆ V``.
    """
    _check_bases(f, B_dom, B_cod, relaxed=False)
    cont = is_soft_continuous(f, B_dom, B_cod, max_subsets, topologies=topologies)
    uc = is_soft_uniformly_continuous(f, B_dom, B_cod)
    steps: list[HeineCantorStep] = []
    if cont.verdict and f.domain.is_carrier:
        T_dom = topologies[0] if topologies is not None else None
        elems = SubsetGrid(f.domain).elements()
        for vname, V in B_cod:
            W = symmetric_root(B_cod, V)
            if W is None:
                raise InternalInconsistency(f"codomain member {vname} has no square root")
            cover = list(dict.fromkeys(preimage(f, entourage_ball(W, apply(f, x))) for x in elems))
            leb = lebesgue_entourage(B_dom, cover, topology=T_dom)
            contained = is_subrelation(pushforward_relation(f, leb.relation), V)
            steps.append(HeineCantorStep(vname, W, leb.relation, contained))
    return HeineCantorReport(cont.verdict, uc.verdict, steps)
