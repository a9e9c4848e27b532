"""Instance, mapping and cover documents.

Documents are YAML flow-style text (JSON is accepted too).  Parsing is
strict: unknown keys, non-string names, duplicates and dangling references
are errors that carry the line they were found on.  Serialisation emits one
canonical form, so parse -> serialise -> parse is the identity on it.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

import yaml

from .core import ParameterSet, SoftRelation, SoftSet, Universe
from .errors import SoftError
from .uniformity import MetricFamily, UniformityBase, format_rational, metric_uniformity, parse_rational

INSTANCE_KEYS = ("universe", "parameters", "sections", "base", "metric", "epsilons")
MAPPING_KEYS = ("domain", "codomain", "maps")


class DocumentError(SoftError):
    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        if source and line is not None:
            message = f"{source}:{line}: {message}"
        elif source:
            message = f"{source}: {message}"
        elif line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
        self.source = source


class _Located:
    """YAML node tree flattened to Python values plus a path -> line map."""

    def __init__(self, text: str, source: str | None):
        self.source = source
        self.lines: dict[tuple, int] = {}
        try:
            node = yaml.compose(text)
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            raise DocumentError(f"malformed document: {getattr(exc, 'problem', exc)}",
                                mark.line + 1 if mark else None, source) from None
        if node is None:
            raise DocumentError("empty document", 1, source)
        self.value = self._convert(node, ())

    def _convert(self, node, path):
        self.lines[path] = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            out = {}
            for knode, vnode in node.value:
                key = self._convert(knode, path + ("<key>",))
                if not isinstance(key, str):
                    raise DocumentError(f"keys must be strings, got {key!r}", knode.start_mark.line + 1, self.source)
                if key in out:
                    raise DocumentError(f"duplicate key {key!r}", knode.start_mark.line + 1, self.source)
                out[key] = self._convert(vnode, path + (key,))
            return out
        if isinstance(node, yaml.SequenceNode):
            return [self._convert(v, path + (i,)) for i, v in enumerate(node.value)]
        return yaml.safe_load(yaml.serialize(node))

    def line(self, path: tuple) -> int | None:
        while path not in self.lines and path:
            path = path[:-1]
        return self.lines.get(path)

    def error(self, message: str, path: tuple = ()) -> DocumentError:
        return DocumentError(message, self.line(path), self.source)


@dataclass(frozen=True)
class NamedGraph:
    name: str
    graph: dict[str, list[tuple[str, str]]]


@dataclass
class InstanceDocument:
    universe: list[str]
    parameters: list[str]
    sections: dict[str, list[str]]
    base: list[NamedGraph] | None = None
    metric: dict[str, list[tuple[str, str, Fraction]]] | None = None
    epsilons: list[Fraction] | None = None
    source: str | None = field(default=None, compare=False)

    def to_obj(self) -> dict:
        out: dict[str, Any] = {
            "universe": list(self.universe),
            "parameters": list(self.parameters),
            "sections": {e: list(self.sections[e]) for e in self.parameters},
        }
        if self.base is not None:
            out["base"] = [
                {"name": g.name, "graph": {e: [list(p) for p in g.graph[e]] for e in self.parameters}}
                for g in self.base
            ]
        if self.metric is not None:
            out["metric"] = {
                e: [[x, y, format_rational(d)] for x, y, d in self.metric[e]] for e in self.parameters
            }
        if self.epsilons is not None:
            out["epsilons"] = [format_rational(q) for q in self.epsilons]
        return out

    def digest(self) -> str:
        return hashlib.sha256(serialize_instance(self).encode()).hexdigest()[:16]


def _dump(value) -> str:
    return json.dumps(value, ensure_ascii=False)


def serialize_instance(doc: InstanceDocument) -> str:
    obj = doc.to_obj()
    lines = [
        f"universe: {_dump(obj['universe'])}",
        f"parameters: {_dump(obj['parameters'])}",
        f"sections: {_dump(obj['sections'])}",
    ]
    if "base" in obj:
        lines.append("base:")
        lines.extend(f"  - {_dump(g)}" for g in obj["base"])
    if "metric" in obj:
        lines.append("metric:")
        lines.extend(f"  {_dump(e)}: {_dump(v)}" for e, v in obj["metric"].items())
    if "epsilons" in obj:
        lines.append(f"epsilons: {_dump(obj['epsilons'])}")
    return "\n".join(lines) + "\n"


def _names(loc: _Located, value, path, what) -> list[str]:
    if not isinstance(value, list) or not value:
        raise loc.error(f"{what} must be a nonempty list of strings", path)
    seen = set()
    for i, v in enumerate(value):
        if not isinstance(v, str):
            raise loc.error(f"{what} entries must be strings, got {v!r}", path + (i,))
        if v in seen:
            raise loc.error(f"duplicate {what} entry {v!r}", path + (i,))
        seen.add(v)
    return list(value)


def _check_keys(loc: _Located, obj, allowed, path, what):
    if not isinstance(obj, dict):
        raise loc.error(f"{what} must be a mapping", path)
    for k in obj:
        if k not in allowed:
            raise loc.error(f"unknown key {k!r} in {what}", path + (k,))


def _instance_from_obj(loc: _Located, obj, path=()) -> InstanceDocument:
    _check_keys(loc, obj, INSTANCE_KEYS, path, "instance")
    for k in ("universe", "parameters", "sections"):
        if k not in obj:
            raise loc.error(f"missing key {k!r}", path)
    universe = _names(loc, obj["universe"], path + ("universe",), "universe")
    order = {u: i for i, u in enumerate(universe)}
    params = _names(loc, obj["parameters"], path + ("parameters",), "parameters")
    raw_sections = obj["sections"]
    _check_keys(loc, raw_sections, params, path + ("sections",), "sections")
    sections = {}
    for e in params:
        if e not in raw_sections:
            raise loc.error(f"missing section for parameter {e!r}", path + ("sections",))
        sp = path + ("sections", e)
        sec = raw_sections[e]
        if not isinstance(sec, list):
            raise loc.error(f"section {e!r} must be a list", sp)
        for i, a in enumerate(sec):
            if a not in order:
                raise loc.error(f"section {e!r} element {a!r} is not in the universe", sp + (i,))
        if len(set(sec)) != len(sec):
            raise loc.error(f"section {e!r} repeats an element", sp)
        sections[e] = sorted(sec, key=order.__getitem__)
    has_base, has_metric = "base" in obj, "metric" in obj
    if has_base and has_metric:
        raise loc.error("give either a base or a metric, not both", path)
    if "epsilons" in obj and not has_metric:
        raise loc.error("epsilons only make sense with a metric", path + ("epsilons",))
    base = None
    if has_base:
        base = []
        bp = path + ("base",)
        if not isinstance(obj["base"], list) or not obj["base"]:
            raise loc.error("base must be a nonempty list", bp)
        names = set()
        for i, item in enumerate(obj["base"]):
            ip = bp + (i,)
            _check_keys(loc, item, ("name", "graph"), ip, "base entry")
            name = item.get("name")
            if not isinstance(name, str):
                raise loc.error("base entry needs a string name", ip)
            if name in names:
                raise loc.error(f"duplicate base entry name {name!r}", ip)
            names.add(name)
            graph = item.get("graph", {})
            _check_keys(loc, graph, params, ip + ("graph",), "graph")
            canon = {}
            for e in params:
                pairs = graph.get(e, [])
                gp = ip + ("graph", e)
                if not isinstance(pairs, list):
                    raise loc.error(f"graph at {e!r} must be a list of pairs", gp)
                sec = set(sections[e])
                out = set()
                for j, p in enumerate(pairs):
                    if not (isinstance(p, list) and len(p) == 2):
                        raise loc.error(f"graph entries must be [x, y] pairs, got {p!r}", gp + (j,))
                    if p[0] not in sec or p[1] not in sec:
                        raise loc.error(
                            f"pair ({p[0]}, {p[1]}) of {name!r} is outside the square of section {e!r}",
                            gp + (j,),
                        )
                    out.add((p[0], p[1]))
                canon[e] = sorted(out, key=lambda q: (order[q[0]], order[q[1]]))
            base.append(NamedGraph(name, canon))
    metric = None
    if has_metric:
        mp = path + ("metric",)
        _check_keys(loc, obj["metric"], params, mp, "metric")
        metric = {}
        for e in params:
            triples = obj["metric"].get(e, [])
            if not isinstance(triples, list):
                raise loc.error(f"metric at {e!r} must be a list of triples", mp + (e,))
            sec = set(sections[e])
            seen: dict[tuple[str, str], Fraction] = {}
            for j, t in enumerate(triples):
                tp = mp + (e, j)
                if not (isinstance(t, list) and len(t) == 3):
                    raise loc.error(f"metric entries must be [x, y, \"p/q\"], got {t!r}", tp)
                x, y, v = t
                if x not in sec or y not in sec:
                    raise loc.error(f"metric pair ({x}, {y}) is outside section {e!r}", tp)
                try:
                    q = parse_rational(v)
                except SoftError as exc:
                    raise loc.error(str(exc), tp) from None
                if x == y:
                    if q != 0:
                        raise loc.error(f"d({x},{x}) must be 0", tp)
                    continue
                key = tuple(sorted((x, y), key=order.__getitem__))
                if key in seen and seen[key] != q:
                    raise loc.error(f"conflicting distances for ({x}, {y})", tp)
                seen[key] = q
            metric[e] = [(a, b, q) for (a, b), q in sorted(seen.items(), key=lambda kv: (order[kv[0][0]], order[kv[0][1]]))]
        if "epsilons" not in obj:
            raise loc.error("a metric needs an epsilons list", mp)
    epsilons = None
    if "epsilons" in obj:
        ep = path + ("epsilons",)
        if not isinstance(obj["epsilons"], list) or not obj["epsilons"]:
            raise loc.error("epsilons must be a nonempty list", ep)
        try:
            epsilons = sorted({parse_rational(v) for v in obj["epsilons"]}, reverse=True)
        except SoftError as exc:
            raise loc.error(str(exc), ep) from None
        if epsilons[-1] <= 0:
            raise loc.error("epsilons must be strictly positive", ep)
    return InstanceDocument(universe, params, sections, base, metric, epsilons, loc.source)


def parse_instance(text: str, source: str | None = None) -> InstanceDocument:
    loc = _Located(text, source)
    return _instance_from_obj(loc, loc.value)


def load_instance(path: str | os.PathLike) -> InstanceDocument:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise DocumentError(f"cannot read instance: {exc.strerror}", None, str(p)) from None
    return parse_instance(text, str(p))


@dataclass
class Instance:
    """A parsed document turned into live objects."""

    doc: InstanceDocument
    host: SoftSet
    base: UniformityBase | None
    metric: MetricFamily | None = None


def build_host(doc: InstanceDocument) -> SoftSet:
    u, P = Universe(doc.universe), ParameterSet(doc.parameters)
    return SoftSet.from_sections(u, P, doc.sections)


def build_instance(doc: InstanceDocument) -> Instance:
    host = build_host(doc)
    base, metric = None, None
    if doc.base is not None:
        members = [SoftRelation.from_pairs(host, g.graph) for g in doc.base]
        base = UniformityBase(host, members, [g.name for g in doc.base])
    elif doc.metric is not None:
        metric = MetricFamily.from_triples(host, doc.metric)
        base = metric_uniformity(metric, doc.epsilons)
    return Instance(doc, host, base, metric)


def instance_from_base(base: UniformityBase) -> InstanceDocument:
    host = base.host
    return InstanceDocument(
        list(host.universe),
        list(host.params),
        {e: list(s) for e, s in host.sections().items()},
        [NamedGraph(n, {e: list(U.pairs(e)) for e in host.params}) for n, U in base],
    )


@dataclass
class MappingDocument:
    domain: InstanceDocument
    codomain: InstanceDocument
    maps: dict[str, dict[str, str]]
    domain_ref: str | None = None
    codomain_ref: str | None = None
    source: str | None = field(default=None, compare=False)


def parse_mapping(text: str, source: str | None = None, base_dir: str | os.PathLike | None = None) -> MappingDocument:
    loc = _Located(text, source)
    obj = loc.value
    _check_keys(loc, obj, MAPPING_KEYS, (), "mapping")
    for k in MAPPING_KEYS:
        if k not in obj:
            raise loc.error(f"missing key {k!r}")
    if base_dir is None:
        base_dir = Path(source).parent if source else Path.cwd()
    sides, refs = {}, {}
    for side in ("domain", "codomain"):
        v = obj[side]
        if isinstance(v, str):
            p = Path(v)
            if not p.is_absolute():
                p = Path(base_dir) / p
            sides[side] = load_instance(p)
            refs[side] = v
        else:
            sides[side] = _instance_from_obj(loc, v, (side,))
            refs[side] = None
    dom, cod = sides["domain"], sides["codomain"]
    if dom.parameters != cod.parameters:
        raise loc.error("domain and codomain must declare the same parameters")
    maps = obj["maps"]
    _check_keys(loc, maps, dom.parameters, ("maps",), "maps")
    canon = {}
    for e in dom.parameters:
        m = maps.get(e)
        mp = ("maps", e)
        if not isinstance(m, dict):
            raise loc.error(f"missing map for parameter {e!r}", ("maps",))
        for a, b in m.items():
            if a not in dom.sections[e]:
                raise loc.error(f"f_{e} is defined at {a!r}, which is not in the domain section", mp + (a,))
            if not isinstance(b, str) or b not in cod.sections[e]:
                raise loc.error(f"f_{e}({a}) = {b!r} is not in the codomain section", mp + (a,))
        missing = [a for a in dom.sections[e] if a not in m]
        if missing:
            raise loc.error(f"f_{e} is undefined at {missing[0]!r}", mp)
        canon[e] = {a: m[a] for a in dom.sections[e]}
    return MappingDocument(dom, cod, canon, refs["domain"], refs["codomain"], source)


def load_mapping(path: str | os.PathLike) -> MappingDocument:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise DocumentError(f"cannot read mapping: {exc.strerror}", None, str(p)) from None
    return parse_mapping(text, str(p))


def serialize_mapping(doc: MappingDocument) -> str:
    def side(d, ref):
        return ref if ref is not None else d.to_obj()

    lines = [
        f"domain: {_dump(side(doc.domain, doc.domain_ref))}",
        f"codomain: {_dump(side(doc.codomain, doc.codomain_ref))}",
        f"maps: {_dump(doc.maps)}",
    ]
    return "\n".join(lines) + "\n"


def parse_cover(text: str, host: SoftSet, source: str | None = None) -> list[SoftSet]:
    """A cover document: ``cover: [{"e1": [...], ...}, ...]``."""
    loc = _Located(text, source)
    obj = loc.value
    _check_keys(loc, obj, ("cover",), (), "cover document")
    items = obj.get("cover")
    if not isinstance(items, list) or not items:
        raise loc.error("cover must be a nonempty list of soft sets")
    out = []
    for i, item in enumerate(items):
        _check_keys(loc, item, list(host.params), ("cover", i), "cover member")
        sections = {e: item.get(e, []) for e in host.params}
        try:
            O = SoftSet.from_sections(host.universe, host.params, sections)
        except SoftError as exc:
            raise loc.error(str(exc), ("cover", i)) from None
        if not O.issubset(host):
            raise loc.error(f"cover member {i} is not a soft subset of the host", ("cover", i))
        out.append(O)
    return out
