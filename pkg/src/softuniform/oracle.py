"""Differential checks: every fast path against an independent slow one."""

from __future__ import annotations

import random

from . import classical
from .completeness import DEFAULT_EXACT_COVER_CAP, DEFAULT_FILTER_CAP, _exact_cover, _greedy_cover, is_complete, is_totally_bounded
from .core import ParameterSet, SoftRelation, SoftSet
from .errors import InternalInconsistency, SizeCapError
from .generate import random_mapping
from .grid import SubsetGrid
from .mapping import SoftMapping, _pointwise_continuity, _topological_continuity, is_soft_continuous, is_soft_uniformly_continuous
from .report import CheckReport
from .topology import DEFAULT_SUBSET_CAP, enumerate_topology, is_separated, is_soft_regular, is_soft_T1
from .uniformity import UniformityBase, slice_base, validate_base


def restrict(B: UniformityBase, e: str) -> UniformityBase:
    """The single-parameter base obtained by keeping only parameter ``e``."""
    host = B.host
    P = ParameterSet([e])
    F = SoftSet.from_sections(host.universe, P, {e: host.section(e)})
    members = [SoftRelation.from_pairs(F, {e: U.pairs(e)}) for U in B.members]
    return UniformityBase(F, members, B.names)


def soft_verdicts(B: UniformityBase, max_subsets: int = DEFAULT_SUBSET_CAP) -> dict[str, bool]:
    T = enumerate_topology(B, max_subsets)
    return {
        "separated": is_separated(B),
        "t1": is_soft_T1(B, topology=T).verdict,
        "regular": is_soft_regular(B, topology=T).verdict,
        "totally_bounded": is_totally_bounded(B).verdict,
        "complete": is_complete(B).verdict,
    }


def classical_space(B: UniformityBase) -> classical.ClassicalSpace:
    (e,) = B.host.params
    return classical.ClassicalSpace(slice_base(B, e))


def _self_maps(F: SoftSet, rng: random.Random, count: int) -> list[SoftMapping]:
    maps = [SoftMapping.identity(F)]
    maps += [random_mapping(rng, F, F) for _ in range(count)]
    return maps


def bridge_disagreements(B: UniformityBase, rng: random.Random, maps: int = 4) -> list[dict]:
    """Soft versus classical verdicts on a one-parameter base."""
    if len(B.host.params) != 1:
        raise ValueError("the classical bridge needs exactly one parameter")
    space = classical_space(B)
    out = []
    sv, cv = soft_verdicts(B), classical.verdicts(space)
    for k in sv:
        if sv[k] != cv[k]:
            out.append({"property": k, "soft": sv[k], "classical": cv[k]})
    (e,) = B.host.params
    for f in _self_maps(B.host, rng, maps):
        fm = f.named_maps()[e]
        pairs = [
            ("continuous", is_soft_continuous(f, B, B).verdict, classical.is_continuous(fm, space, space)),
            (
                "uniformly_continuous",
                is_soft_uniformly_continuous(f, B, B).verdict,
                classical.is_uniformly_continuous(fm, space, space),
            ),
        ]
        for k, s, c in pairs:
            if s != c:
                out.append({"property": k, "map": fm, "soft": s, "classical": c})
    return out


def _slice_check(B: UniformityBase):
    bad = []
    for e in B.host.params:
        problems = classical.validate_base(slice_base(B, e))
        soft_ok = validate_base(restrict(B, e)).valid
        if soft_ok != (not problems):
            bad.append({"parameter": e, "soft_valid": soft_ok, "classical_problems": problems})
        elif B.is_valid and problems:
            bad.append({"parameter": e, "slice_invalid": problems})
    return (not bad), (bad or None), [f"{len(B.host.params)} slice(s) compared"]


def _continuity_check(B, T, seed):
    rng = random.Random(seed)
    bad = []
    for f in _self_maps(B.host, rng, 6):
        pw, _ = _pointwise_continuity(f, B, B)
        top, _ = _topological_continuity(f, T, T)
        if pw != top:
            bad.append({"map": f.named_maps(), "pointwise": pw, "topological": top})
    return (not bad), (bad or None), ["identity and 6 random self-maps"]


def _t1_check(B, T, max_subsets):
    try:
        r = is_soft_T1(B, topology=T, max_subsets=max_subsets)
    except InternalInconsistency as exc:
        return False, {"error": str(exc)}, []
    ok = r.via_topology is None or r.via_topology == r.via_balls
    return ok, None if ok else {"via_balls": r.via_balls, "via_topology": r.via_topology}, [
        f"T1 by balls={r.via_balls}, by enumeration={r.via_topology}"
    ]


def _cover_check(B: UniformityBase, exact_limit: int):
    grid = SubsetGrid(B.host)
    elems = grid.elements()
    if len(elems) > exact_limit:
        raise SizeCapError(f"{len(elems)} soft elements exceed the exact cover cap of {exact_limit}")
    bad = []
    for name, U in B:
        balls = [grid.ball_code(U, x) for x in elems]
        g, x = _greedy_cover(grid.full, balls), _exact_cover(grid.full, balls)
        if (g is None) != (x is None) or (g is not None and len(x) > len(g)):
            bad.append({"entourage": name, "greedy": g, "exact": x})
    return (not bad), (bad or None), []


def oracle_report(
    B: UniformityBase,
    digest: str | None = None,
    max_subsets: int = DEFAULT_SUBSET_CAP,
    exact_limit: int = DEFAULT_EXACT_COVER_CAP,
    seed: int = 0,
) -> CheckReport:
    report = CheckReport("oracle", digest)
    cache = {}

    def topology():
        if "T" not in cache:
            cache["T"] = enumerate_topology(B, max_subsets)
        return cache["T"]

    report.run("slices-vs-classical", lambda: _slice_check(B))
    if not B.is_valid:
        return report
    report.run("continuity-pointwise-vs-preimage", lambda: _continuity_check(B, topology(), seed))
    report.run("t1-balls-vs-enumeration", lambda: _t1_check(B, topology(), max_subsets))
    if B.host.is_carrier:
        report.run("cover-greedy-vs-exact", lambda: _cover_check(B, exact_limit))
    if len(B.host.params) == 1 and B.host.is_carrier:
        def bridge():
            if B.host.element_count() > DEFAULT_FILTER_CAP:
                raise SizeCapError("too many soft elements for the classical bridge")
            bad = bridge_disagreements(B, random.Random(seed))
            return (not bad), (bad or None), []

        report.run("soft-vs-classical", bridge)
    return report
