"""Command line entry point: ``softuniform <command> ...``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import completeness, mapping, topology
from .core import SoftSet
from .documents import (
    DocumentError,
    Instance,
    build_instance,
    load_instance,
    load_mapping,
    parse_cover,
    serialize_instance,
    serialize_mapping,
)
from .errors import SizeCapError, SoftError
from .grid import SubsetGrid
from .generate import Profile, generate_instance, generate_mapping
from .oracle import oracle_report
from .report import EXIT_INPUT, CheckReport
from .uniformity import UniformityBase, member_of

COMMANDS = ("validate", "topology", "separation", "map-check", "lebesgue", "cover", "complete", "generate", "oracle")


def _sections(O: SoftSet) -> dict[str, list[str]]:
    return {e: list(v) for e, v in O.sections().items()}


def _names(x) -> list[str]:
    return list(x.names())


def _need_base(inst: Instance, relaxed: bool) -> UniformityBase:
    if inst.base is None:
        raise DocumentError("instance has no base or metric", None, inst.doc.source)
    inst.base.require_valid(relaxed)
    return inst.base


def _off_diagonal(B: UniformityBase):
    host = B.host
    M = B.smallest()
    for e in host.params:
        for a, b in M.pairs(e):
            if a != b:
                return {"parameter": e, "pair": [a, b], "in_members": list(B.names)}
    return None


def cmd_validate(inst: Instance, **_) -> CheckReport:
    rep = CheckReport("validate", inst.doc.digest())
    if inst.base is None:
        raise DocumentError("instance has no base or metric", None, inst.doc.source)
    report = inst.base.report
    for axiom in ("U1", "U2", "U3", "U4"):
        bad = report.by_axiom(axiom)
        rep.add(axiom, not bad, [v.to_dict() for v in bad] or None)
    diag = [f"{len(inst.base)} member(s): {', '.join(inst.base.names)}"]
    if not inst.host.is_carrier:
        diag.append("host has an empty section: there are no soft elements")
    rep.checks[0].diagnostics.extend(diag)
    return rep


def cmd_topology(inst: Instance, max_subsets: int, relaxed: bool = False, **_) -> CheckReport:
    rep = CheckReport("topology", inst.doc.digest())
    B = _need_base(inst, relaxed)
    T = topology.enumerate_topology(B, max_subsets, relaxed)
    ax = T.axiom_report()
    rep.add("contains-empty", ax.contains_empty)
    rep.add("contains-host", ax.contains_host)
    for name, fail, wit, checked, exh in (
        ("closed-under-union", ax.union_failures, ax.union_witness, ax.union_checked, ax.union_exhaustive),
        (
            "closed-under-intersection",
            ax.intersection_failures,
            ax.intersection_witness,
            ax.intersection_checked,
            ax.intersection_exhaustive,
        ),
    ):
        w = None
        if wit is not None:
            w = {"left": _sections(wit[0]), "right": _sections(wit[1]), "result_not_open": _sections(wit[2])}
        mode = "exhaustive" if exh else "sampled"
        rep.add(name, not fail, w, [f"{checked} pairs checked ({mode}), {fail} not open"])
    rep.extra["opens"] = len(T)
    rep.extra["vacuous_opens"] = T.vacuous_count
    return rep


def cmd_separation(inst: Instance, max_subsets: int, **_) -> CheckReport:
    rep = CheckReport("separation", inst.doc.digest())
    B = _need_base(inst, False)
    sep = topology.is_separated(B)
    rep.add("separated", sep, None if sep else _off_diagonal(B))
    cache = {}

    def T():
        if "T" not in cache:
            cache["T"] = topology.enumerate_topology(B, max_subsets)
        return cache["T"]

    def t1():
        try:
            tp = T()
        except SizeCapError:
            tp = None
        r = topology.is_soft_T1(B, topology=tp, use_topology=tp is not None)
        if r.vacuous:
            return "vacuous", None, ["host has no soft elements"]
        w = None if r.counterexample is None else {
            "element": _names(r.counterexample[0]),
            "inside_every_open_around_it": _names(r.counterexample[1]),
        }
        diag = [f"enumerated topology agrees: {r.via_topology}"] if r.via_topology is not None else []
        return r.verdict, w, diag

    c = rep.run("T1", t1)
    if c.verdict != "skipped":
        same = (c.verdict != "fail") == sep
        rep.add("separated-iff-T1", same, None if same else {"separated": sep, "T1": c.verdict})

    def regular():
        r = topology.is_soft_regular(B, topology=T())
        w = None
        if r.counterexample is not None:
            x, C = r.counterexample
            w = {"element": _names(x), "closed": _sections(C)}
        return r.verdict, w, [f"{r.checked} (element, closed set) pairs, {r.searched} by search"]

    rep.run("regular", regular)
    return rep


def _uniform_witness(f: mapping.SoftMapping, B_dom, V, vname):
    """For each domain member a pair it relates whose image leaves ``V``."""
    out = {"codomain_entourage": vname, "escapes": []}
    du, cu = f.domain.universe, f.codomain.universe
    for uname, U in B_dom:
        for k, e in enumerate(f.domain.params):
            hit = None
            for a, b in U.pairs(e):
                fa, fb = f.at(k, du.index(a)), f.at(k, du.index(b))
                if not V.rows[k][fa] >> fb & 1:
                    hit = [a, b, cu[fa], cu[fb]]
                    break
            if hit:
                out["escapes"].append({"domain_entourage": uname, "parameter": e, "pair": hit[:2], "image": hit[2:]})
                break
    return out


def cmd_map_check(mdoc, max_subsets: int, relaxed: bool = False, **_) -> CheckReport:
    dom, cod = build_instance(mdoc.domain), build_instance(mdoc.codomain)
    rep = CheckReport("map-check", mdoc.domain.digest() + ":" + mdoc.codomain.digest())
    Bd, Bc = _need_base(dom, relaxed), _need_base(cod, relaxed)
    f = mapping.SoftMapping.from_names(dom.host, cod.host, mdoc.maps)
    try:
        tops = (
            topology.enumerate_topology(Bd, max_subsets, relaxed),
            topology.enumerate_topology(Bc, max_subsets, relaxed),
        )
    except SizeCapError:
        tops = None
    c = mapping.is_soft_continuous(f, Bd, Bc, max_subsets, relaxed, topologies=tops)
    rep.add("continuous", c.verdict, c.witness, [f"method: {c.method}; pointwise={c.pointwise} preimage={c.topological}"])
    u = mapping.is_soft_uniformly_continuous(f, Bd, Bc, relaxed)
    w = None
    if not u.verdict:
        w = _uniform_witness(f, Bd, Bc.members[Bc.names.index(u.failing)], u.failing)
    rep.add("uniformly-continuous", u.verdict, w)
    rep.add("uniform-implies-continuous", c.verdict or not u.verdict)
    rep.add("compact-domain", mapping.is_soft_compact(Bd).verdict, diagnostics=["finite host"])
    gap = c.verdict and not u.verdict
    rep.add("continuous-implies-uniform", not gap, w if gap else None)
    if relaxed and not (Bd.is_valid and Bc.is_valid):
        rep.add("heine-cantor-replay", "skipped", diagnostics=["needs valid bases"])
    else:
        hc = mapping.heine_cantor_check(f, Bd, Bc, max_subsets, topologies=tops)
        rep.add("heine-cantor-replay", hc.holds and hc.chains_verified, None,
                [f"{len(hc.steps)} Lebesgue step(s) replayed"])
    return rep


def _default_cover(B: UniformityBase) -> list[SoftSet]:
    M = B.smallest()
    return list(dict.fromkeys(topology.entourage_ball(M, x) for x in SubsetGrid(B.host).elements()))


def cmd_lebesgue(inst: Instance, cover_path: str | None = None, max_subsets: int = topology.DEFAULT_SUBSET_CAP, **_) -> CheckReport:
    rep = CheckReport("lebesgue", inst.doc.digest())
    B = _need_base(inst, False)
    if not inst.host.is_carrier:
        rep.add("lebesgue-entourage", "vacuous", diagnostics=["host has no soft elements"])
        return rep
    if cover_path is None:
        cover = _default_cover(B)
        rep.extra["cover"] = "balls of the smallest member"
    else:
        text = Path(cover_path).read_text(encoding="utf-8")
        cover = parse_cover(text, inst.host, cover_path)
    L = mapping.lebesgue_entourage(B, cover)
    # re-check from scratch rather than trusting the construction's own flag
    grid = SubsetGrid(B.host)
    codes = [grid.code(O) for O in cover]
    refines = all(any(grid.ball_code(L.relation, x) & ~c == 0 for c in codes) for x in grid.elements())
    member = member_of(B, L.relation)
    rep.add("lebesgue-entourage", L.verified and refines and member, None,
            [f"{len(cover)} cover member(s), {len(L.centers)} centre(s) in the subcover"])
    rep.extra["entourage"] = {e: [list(p) for p in L.relation.pairs(e)] for e in B.host.params}
    return rep


def cmd_cover(inst: Instance, **_) -> CheckReport:
    rep = CheckReport("cover", inst.doc.digest())
    B = _need_base(inst, False)
    if not inst.host.is_carrier:
        rep.add("totally-bounded", "vacuous", diagnostics=["host has no soft elements"])
        return rep
    tb = completeness.is_totally_bounded(B)
    for name, _U in B:
        centres = tb.covers[name]
        diag = [f"greedy {len(centres)} ball(s), minimum {tb.minimum[name]}"]
        rep.add(f"cover[{name}]", bool(centres), {"centres": [_names(x) for x in centres]}, diag)
    return rep


def cmd_complete(inst: Instance, max_elements: int, **_) -> CheckReport:
    rep = CheckReport("complete", inst.doc.digest())
    B = _need_base(inst, False)
    if not inst.host.is_carrier:
        rep.add("totally-bounded", "vacuous", diagnostics=["host has no soft elements"])
        rep.add("complete", "vacuous", diagnostics=["host has no soft elements"])
        return rep
    tb = completeness.is_totally_bounded(B)
    rep.add("totally-bounded", tb.verdict, None if tb.verdict else [n for n, c in tb.covers.items() if not c])

    def complete():
        r = completeness.is_complete(B, max_elements)
        w = None
        if not r.verdict:
            w = {"cauchy_generator_without_limit": [_names(x) for x in r.failures[0]]}
        return r.verdict, w, [f"{r.cauchy_count} Cauchy principal filter(s) over {r.element_count} soft elements"]

    c = rep.run("complete", complete)
    if c.verdict == "pass":
        def traces():
            r = completeness.is_complete(B, max_elements)
            bad = None
            for g in r.cauchy_generators:
                t = completeness.cauchy_limit_trace(B, int(g), space=r.space)
                if not t.verified:
                    bad = t.to_dict()
                    break
            return bad is None, bad, [f"{r.cauchy_count} trace(s) replayed"]

        rep.run("limit-traces", traces)
    return rep


def cmd_oracle(inst: Instance, max_subsets: int, seed: int = 0, relaxed: bool = False, **_) -> CheckReport:
    B = _need_base(inst, relaxed)
    return oracle_report(B, inst.doc.digest(), max_subsets=max_subsets, seed=seed)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="text")
    common.add_argument("-o", "--output", help="write to this file instead of stdout")
    common.add_argument("--seed", type=int, default=0, help="seed for randomised steps (u64)")
    common.add_argument("--max-subsets", type=int, default=topology.DEFAULT_SUBSET_CAP)
    common.add_argument("--max-elements", type=int, default=completeness.DEFAULT_FILTER_CAP)
    common.add_argument("--allow-invalid", action="store_true",
                        help="accept bases that only contain the diagonal (relaxed mode)")
    p = argparse.ArgumentParser(prog="softuniform", description="Finite soft uniform spaces: checks and experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("validate", "topology", "separation", "cover", "complete", "oracle"):
        sp = sub.add_parser(name, parents=[common])
        sp.add_argument("instance")
    sp = sub.add_parser("map-check", parents=[common])
    sp.add_argument("mapping")
    sp = sub.add_parser("lebesgue", parents=[common])
    sp.add_argument("instance")
    sp.add_argument("--cover", help="cover document; default is the balls of the smallest member")
    sp = sub.add_parser("generate", parents=[common])
    sp.add_argument("--max-universe", type=int, default=6)
    sp.add_argument("--max-params", type=int, default=3)
    sp.add_argument("--max-base", type=int, default=4)
    sp.add_argument("--mapping", action="store_true", help="emit a mapping document between two instances")
    return p


def _emit(text: str, output: str | None):
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def run(argv: list[str] | None = None) -> tuple[int, str]:
    """Parse ``argv``, run the command and return ``(exit code, rendered output)``."""
    return _run(build_parser().parse_args(argv))


def _run(args) -> tuple[int, str]:
    seed = args.seed
    if not 0 <= seed < 1 << 64:
        return EXIT_INPUT, "error: --seed must be an unsigned 64-bit integer\n"
    if args.command == "generate":
        profile = Profile(args.max_universe, args.max_params, args.max_base)
        if args.mapping:
            return 0, serialize_mapping(generate_mapping(seed, profile))
        return 0, serialize_instance(generate_instance(seed, profile, args.allow_invalid))
    opts = dict(max_subsets=args.max_subsets, max_elements=args.max_elements, seed=seed, relaxed=args.allow_invalid)
    try:
        if args.command == "map-check":
            mdoc = load_mapping(args.mapping)
            rep = cmd_map_check(mdoc, **opts)
        else:
            inst = build_instance(load_instance(args.instance))
            if args.command == "lebesgue":
                rep = cmd_lebesgue(inst, cover_path=args.cover, **opts)
            else:
                handler = {
                    "validate": cmd_validate,
                    "topology": cmd_topology,
                    "separation": cmd_separation,
                    "cover": cmd_cover,
                    "complete": cmd_complete,
                    "oracle": cmd_oracle,
                }[args.command]
                rep = handler(inst, **opts)
    except DocumentError as exc:
        rep = CheckReport(args.command, error=f"{type(exc).__name__}: {exc}")
    except SoftError as exc:
        where = getattr(args, "mapping", None) or getattr(args, "instance", None)
        rep = CheckReport(args.command, error=f"{where}: {type(exc).__name__}: {exc}")
    except OSError as exc:
        rep = CheckReport(args.command, error=f"{exc.filename}: {exc.strerror}")
    return rep.exit_code, rep.render(args.format)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    code, text = _run(args)
    _emit(text, args.output)
    return code


if __name__ == "__main__":
    sys.exit(main())
