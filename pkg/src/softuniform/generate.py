"""Seeded random instances, random mappings and the relaxed-mode gap search.

Everything here is driven by one ``random.Random(seed)``, so a seed always
reproduces the same document byte for byte.
"""

from __future__ import annotations

import random
import string
from dataclasses import dataclass

from .core import SoftRelation, SoftSet
from .documents import InstanceDocument, MappingDocument, build_host, build_instance, instance_from_base, serialize_instance
from .errors import SizeCapError, SoftError
from .mapping import SoftMapping, is_soft_continuous, is_soft_uniformly_continuous
from .uniformity import UniformityBase, saturate

DENSITIES = (0.0, 0.15, 0.35, 0.6, 1.0)


@dataclass(frozen=True)
class Profile:
    max_universe: int = 6
    max_params: int = 3
    max_base: int = 4

    def __post_init__(self):
        if not (1 <= self.max_universe <= 26 and self.max_params >= 1 and self.max_base >= 1):
            raise SoftError(f"bad profile {self}")


def random_host(rng: random.Random, profile: Profile, n_params: int | None = None) -> SoftSet:
    n = rng.randint(1, profile.max_universe)
    universe = list(string.ascii_lowercase[:n])
    m = n_params if n_params is not None else rng.randint(1, profile.max_params)
    params = [f"e{i + 1}" for i in range(m)]
    sections = {e: rng.sample(universe, rng.randint(1, n)) for e in params}
    doc = InstanceDocument(universe, params, sections)
    return build_host(doc)


def _random_reflexive(rng: random.Random, host: SoftSet) -> SoftRelation:
    graph = {}
    for e in host.params:
        sec = host.section(e)
        p = rng.choice(DENSITIES)
        graph[e] = [(a, b) for a in sec for b in sec if a == b or rng.random() < p]
    return SoftRelation.from_pairs(host, graph)


def _random_partition(rng: random.Random, sec: tuple[str, ...]) -> list[list[str]]:
    blocks: list[list[str]] = []
    for a in sec:
        i = rng.randint(0, len(blocks))
        if i == len(blocks):
            blocks.append([a])
        else:
            blocks[i].append(a)
    return blocks


def _equivalence(rng: random.Random, host: SoftSet) -> SoftRelation:
    graph = {}
    for e in host.params:
        sec = host.section(e)
        if rng.random() < 0.4:
            blocks = [[a] for a in sec]
        else:
            blocks = _random_partition(rng, sec)
        graph[e] = [(a, b) for blk in blocks for a in blk for b in blk]
    return SoftRelation.from_pairs(host, graph)


def _symmetric_superset(rng: random.Random, R: SoftRelation) -> SoftRelation:
    host = R.host
    graph = {}
    for e in host.params:
        sec = host.section(e)
        have = set(R.pairs(e))
        p = rng.choice(DENSITIES[1:])
        for i, a in enumerate(sec):
            for b in sec[i + 1:]:
                if rng.random() < p:
                    have |= {(a, b), (b, a)}
        graph[e] = sorted(have)
    return SoftRelation.from_pairs(host, graph)


def _anchored_base(rng: random.Random, host: SoftSet, k: int, max_base: int) -> UniformityBase:
    """A base that is valid by construction.

    An equivalence relation ``E`` satisfies ``E∘E = E`` and lies inside each
    symmetric superset, so it serves as the square root of every member.
    """
    E = _equivalence(rng, host)
    extras = [_symmetric_superset(rng, E) for _ in range(k - 1)]
    B = saturate([E] + extras, ["E"] + [f"S{i + 1}" for i in range(k - 1)])
    if len(B) <= max_base:
        return B
    chain = [E]
    for i in range(k - 1):
        chain.append(_symmetric_superset(rng, chain[-1]))
    return saturate(chain, ["E"] + [f"S{i + 1}" for i in range(k - 1)])


def random_base(
    rng: random.Random, host: SoftSet, profile: Profile, allow_invalid: bool = False
) -> UniformityBase:
    k = rng.randint(1, profile.max_base)
    relations = [_random_reflexive(rng, host) for _ in range(k)]
    try:
        B = saturate(relations, strict=False, max_members=profile.max_base)
    except SizeCapError:
        B = None
    if B is not None and (B.is_valid or allow_invalid):
        return B
    return _anchored_base(rng, host, rng.randint(1, profile.max_base), profile.max_base)


def generate_instance(
    seed: int,
    profile: Profile = Profile(),
    allow_invalid: bool = False,
    n_params: int | None = None,
) -> InstanceDocument:
    """Random carrier host with a saturated base.

    Saturations that lack square roots are replaced by a base built around
    an equivalence relation, unless ``allow_invalid`` lets them through.
    """
    rng = random.Random(seed)
    host = random_host(rng, profile, n_params)
    return instance_from_base(random_base(rng, host, profile, allow_invalid))


def generate_document(seed: int, profile: Profile = Profile(), allow_invalid: bool = False) -> str:
    return serialize_instance(generate_instance(seed, profile, allow_invalid))


def random_mapping(rng: random.Random, domain: SoftSet, codomain: SoftSet) -> SoftMapping:
    maps = {}
    style = rng.random()
    for e in domain.params:
        src, dst = domain.section(e), codomain.section(e)
        if style < 0.25:
            c = rng.choice(dst)
            maps[e] = {a: c for a in src}
        elif style < 0.45:
            maps[e] = {a: a if a in dst else rng.choice(dst) for a in src}
        else:
            maps[e] = {a: rng.choice(dst) for a in src}
    return SoftMapping.from_names(domain, codomain, maps)


def generate_mapping(seed: int, profile: Profile = Profile()) -> MappingDocument:
    """A random mapping between two random valid instances sharing a parameter set."""
    rng = random.Random(seed)
    m = rng.randint(1, profile.max_params)
    dom = generate_instance(rng.getrandbits(64), profile, n_params=m)
    cod = generate_instance(rng.getrandbits(64), profile, n_params=m)
    f = random_mapping(rng, build_host(dom), build_host(cod))
    return MappingDocument(dom, cod, f.named_maps())


@dataclass
class RelaxedGap:
    seed: int
    base: UniformityBase
    mapping: SoftMapping

    def document(self) -> MappingDocument:
        doc = instance_from_base(self.base)
        return MappingDocument(doc, doc, self.mapping.named_maps())


def search_relaxed_gap(
    start: int = 0, tries: int = 2000, maps_per_instance: int = 24, profile: Profile = Profile(max_universe=4, max_params=1)
) -> RelaxedGap | None:
    """First ``--allow-invalid`` instance whose self-map is continuous but not uniformly so.

    On a valid base the two notions coincide for finite hosts, so such a gap
    shows the checkers do react when the square-root axiom is dropped.
    """
    for seed in range(start, start + tries):
        doc = generate_instance(seed, profile, allow_invalid=True)
        inst = build_instance(doc)
        B = inst.base
        if B.is_valid or not B.report.axiom_ok("U1"):
            continue
        rng = random.Random(seed)
        for _ in range(maps_per_instance):
            f = random_mapping(rng, inst.host, inst.host)
            c = is_soft_continuous(f, B, B, relaxed=True)
            if c.verdict and not is_soft_uniformly_continuous(f, B, B, relaxed=True).verdict:
                return RelaxedGap(seed, B, f)
    return None
