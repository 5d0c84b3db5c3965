"""Turning the DTP graph into BGPs, plus post-processing and reporting."""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from scipy.cluster.hierarchy import DisjointSet

from .dtp import DtpGraph
from .rdf import (
    OBJECT,
    RESERVED,
    SUBJECT,
    Bgp,
    JoinEdge,
    TriplePattern,
    Variable,
    format_term,
    parse_term,
)
from .syntax import ParseError, tokenize


@dataclass(frozen=True)
class DeducedBgp:
    bgp: Bgp
    # one per DTP edge inside the component, pattern indices into bgp.patterns
    joins: tuple[JoinEdge, ...]
    support: tuple[int, ...]
    window: tuple[int, int]

    @property
    def patterns(self) -> tuple[TriplePattern, ...]:
        return self.bgp.patterns


class VariableNamer:
    """Hands out ?s_k / ?o_k names; one counter per prefix, shared across calls."""

    def __init__(self):
        self.counters = {"s": 0, "o": 0}

    def fresh(self, prefix: str) -> Variable:
        self.counters[prefix] += 1
        return Variable(f"{prefix}_{self.counters[prefix]}")


def extract_bgps(graph: DtpGraph, namer: VariableNamer | None = None) -> list[DeducedBgp]:
    """One BGP per connected component of the DTP graph.

    Positions tied by an edge label share a fresh variable. A placeholder
    left on its own with a single input value is replaced by that value.
    """
    namer = namer or VariableNamer()
    nodes = {n.id: n for n in graph.nodes}

    components = DisjointSet(nodes)
    for e in graph.edges:
        components.merge(e.parent, e.child)

    # variable classes over (dtp id, position)
    slots = DisjointSet()
    for n in graph.nodes:
        tp = n.template
        for pos, term in ((SUBJECT, tp.s), (OBJECT, tp.o)):
            if isinstance(term, Variable):
                slots.add((n.id, pos))
        if isinstance(tp.s, Variable) and tp.s == tp.o:
            slots.merge((n.id, SUBJECT), (n.id, OBJECT))

    def anchor(dtp_id: int, var: Variable) -> str:
        positions = nodes[dtp_id].template.positions_of(var)
        if not positions:
            raise ValueError(f"{var} does not occur in dtp {dtp_id}")
        return positions[0]

    for e in graph.edges:
        slots.merge((e.parent, anchor(e.parent, e.parent_var)), (e.child, anchor(e.child, e.child_var)))

    names: dict[tuple[int, str], Variable] = {}
    for n in graph.nodes:
        tp = n.template
        for pos, term in ((SUBJECT, tp.s), (OBJECT, tp.o)):
            if not isinstance(term, Variable):
                continue
            root = slots[(n.id, pos)]
            if root in names:
                continue
            if term in RESERVED and slots.subset_size(root) == 1:
                values = n.inputs.get(term)
                assert values, f"dtp {n.id}: placeholder without input values"
                if len(values) == 1:
                    continue
            names[root] = namer.fresh("s" if pos == SUBJECT else "o")

    def resolve(n, pos, term):
        if not isinstance(term, Variable):
            return term
        root = slots[(n.id, pos)]
        if root in names:
            return names[root]
        return next(iter(n.inputs.get(term)))

    edges_of: dict[int, list] = {}
    for e in graph.edges:
        edges_of.setdefault(components[e.parent], []).append(e)

    out = []
    for members in sorted((sorted(c) for c in components.subsets()), key=lambda c: c[0]):
        index = {dtp_id: i for i, dtp_id in enumerate(members)}
        patterns = []
        for dtp_id in members:
            n = nodes[dtp_id]
            tp = n.template
            patterns.append(TriplePattern(resolve(n, SUBJECT, tp.s), tp.p, resolve(n, OBJECT, tp.o)))
        joins = tuple(
            JoinEdge(index[e.parent], anchor(e.parent, e.parent_var), index[e.child], anchor(e.child, e.child_var))
            for e in edges_of.get(components[members[0]], ())
        )
        window = (min(nodes[i].ts_min for i in members), max(nodes[i].ts_max for i in members))
        out.append(DeducedBgp(Bgp(tuple(patterns)), joins, tuple(members), window))
    return out


# -- self-join post-filter ------------------------------------------------------


def _shape(tp: TriplePattern):
    def part(t):
        return None if isinstance(t, Variable) else t

    return (part(tp.s), tp.p, part(tp.o), isinstance(tp.s, Variable) and tp.s == tp.o)


def is_pure_self_join(d: DeducedBgp, j: JoinEdge) -> bool:
    """Same predicate, same constant/variable shape, same join position."""
    a, b = d.patterns[j.a], d.patterns[j.b]
    return j.pos_a == j.pos_b and _shape(a) == _shape(b)


def _sub_bgp(d: DeducedBgp, keep: Sequence[int], joins: Iterable[JoinEdge],
             windows: dict[int, tuple[int, int]] | None) -> DeducedBgp:
    index = {old: new for new, old in enumerate(keep)}
    patterns = tuple(d.patterns[i] for i in keep)
    new_joins = tuple(JoinEdge(index[j.a], j.pos_a, index[j.b], j.pos_b) for j in joins)
    support = tuple(d.support[i] for i in keep)
    if windows:
        window = (min(windows[s][0] for s in support), max(windows[s][1] for s in support))
    else:
        window = d.window
    return DeducedBgp(Bgp(patterns), new_joins, support, window)


def filter_self_joins(bgps: Sequence[DeducedBgp],
                      windows: dict[int, tuple[int, int]] | None = None) -> list[DeducedBgp]:
    """Drop BGPs made only of self-joins; strip self-join edges from the others.

    A BGP that falls apart once its self-join edges are gone is re-split into
    its connected pieces. ``windows`` (dtp id -> ts range) lets re-split
    pieces report their own time window; without it they keep the parent's.
    """
    out = []
    for d in bgps:
        selfish = [j for j in d.joins if is_pure_self_join(d, j)]
        if not selfish:
            out.append(d)
            continue
        if len(selfish) == len(d.joins):
            continue
        kept = [j for j in d.joins if not is_pure_self_join(d, j)]
        parts = DisjointSet(range(len(d.patterns)))
        for j in kept:
            parts.merge(j.a, j.b)
        for members in sorted((sorted(c) for c in parts.subsets()), key=lambda c: c[0]):
            inside = set(members)
            out.append(_sub_bgp(d, members, [j for j in kept if j.a in inside], windows))
    return out


# -- statistics -------------------------------------------------------------------

JOIN_KINDS = ("subject-subject", "subject-object", "object-object")


def bgp_stats(bgps: Sequence[DeducedBgp]) -> dict:
    """Join types, BGP sizes and predicate frequencies over detected joins."""
    kinds = Counter({k: 0 for k in JOIN_KINDS})
    sizes: Counter = Counter()
    predicates: Counter = Counter()
    for d in bgps:
        sizes[len(d.patterns)] += 1
        for tp in d.patterns:
            predicates[format_term(tp.p)] += 1
        for j in d.joins:
            kinds[j.kind()] += 1
    return {
        "bgps": len(bgps),
        "multi_pattern_bgps": sum(n for size, n in sizes.items() if size > 1),
        "joins": dict(kinds),
        "sizes": {str(k): sizes[k] for k in sorted(sizes)},
        "predicates": dict(sorted(predicates.items(), key=lambda kv: (-kv[1], kv[0]))),
    }


def format_stats(report: dict) -> str:
    lines = [f"bgps\t{report['bgps']}", f"multi-pattern bgps\t{report['multi_pattern_bgps']}"]
    lines += [f"{kind}\t{n}" for kind, n in report["joins"].items()]
    lines += [f"size {k}\t{n}" for k, n in report["sizes"].items()]
    lines += [f"predicate {p}\t{n}" for p, n in report["predicates"].items()]
    return "\n".join(lines) + "\n"


# -- output documents ---------------------------------------------------------------


def bgp_record(d: DeducedBgp) -> dict:
    return {
        "patterns": [str(tp) for tp in d.patterns],
        "joins": [[j.a, j.pos_a, j.b, j.pos_b] for j in d.joins],
        "support": list(d.support),
        "window": list(d.window),
    }


def to_document(bgps: Sequence[DeducedBgp], meta: dict) -> dict:
    return {"meta": meta, "bgps": [bgp_record(d) for d in bgps]}


def dumps_document(doc: dict, fmt: str = "canonical") -> str:
    """Render a document; canonical is JSON with one BGP record per line."""
    if fmt == "canonical":
        dump = json.dumps
        lines = ['{"meta": ' + dump(doc["meta"], ensure_ascii=False) + ",", ' "bgps": [']
        records = [dump(r, ensure_ascii=False) for r in doc["bgps"]]
        lines += ["  " + r + "," for r in records[:-1]]
        lines += ["  " + r for r in records[-1:]]
        lines.append("]}")
        return "\n".join(lines) + "\n"
    if fmt == "xml":
        return _to_xml(doc)
    raise ValueError(f"unknown format {fmt!r}")


def _to_xml(doc: dict) -> str:
    root = ET.Element("bgps")
    meta = ET.SubElement(root, "meta")
    for key, value in doc["meta"].items():
        ET.SubElement(meta, "field", name=key).text = json.dumps(value, ensure_ascii=False)
    for rec in doc["bgps"]:
        el = ET.SubElement(
            root, "bgp", start=str(rec["window"][0]), end=str(rec["window"][1])
        )
        for tp, dtp in zip(rec["patterns"], rec["support"]):
            ET.SubElement(el, "tp", dtp=str(dtp)).text = tp
        for a, pos_a, b, pos_b in rec["joins"]:
            ET.SubElement(el, "join", a=str(a), posA=pos_a, b=str(b), posB=pos_b)
    ET.indent(root)
    return ET.tostring(root, encoding="unicode") + "\n"


def _pattern_from_text(text: str) -> TriplePattern:
    tokens = tokenize(text)
    if len(tokens) != 3:
        raise ParseError(f"bad pattern {text!r}")
    return TriplePattern(*(parse_term(t) for t in tokens))


def _from_record(rec: dict) -> DeducedBgp:
    patterns = tuple(_pattern_from_text(t) for t in rec["patterns"])
    joins = tuple(JoinEdge(int(a), pa, int(b), pb) for a, pa, b, pb in rec["joins"])
    for j in joins:
        if not (0 <= j.a < len(patterns) and 0 <= j.b < len(patterns)):
            raise ParseError("join refers to a missing pattern")
        if j.pos_a not in (SUBJECT, OBJECT) or j.pos_b not in (SUBJECT, OBJECT):
            raise ParseError("bad join position")
    return DeducedBgp(Bgp(patterns), joins, tuple(rec["support"]), tuple(rec["window"]))


def loads_document(text: str) -> tuple[dict, list[DeducedBgp]]:
    """Read a BGP document in either format; returns (meta, bgps)."""
    stripped = text.lstrip()
    try:
        if stripped.startswith("<"):
            return _from_xml(stripped)
        doc = json.loads(text)
        return doc.get("meta", {}), [_from_record(r) for r in doc["bgps"]]
    except (KeyError, TypeError, ValueError, ET.ParseError) as exc:
        raise ParseError(f"not a BGP document: {exc}") from None


def _from_xml(text: str):
    root = ET.fromstring(text)
    meta = {f.get("name"): json.loads(f.text) for f in root.iterfind("meta/field")}
    bgps = []
    for el in root.iterfind("bgp"):
        rec = {
            "patterns": [tp.text for tp in el.iterfind("tp")],
            "support": [int(tp.get("dtp")) for tp in el.iterfind("tp")],
            "joins": [[j.get("a"), j.get("posA"), j.get("b"), j.get("posB")] for j in el.iterfind("join")],
            "window": [int(el.get("start")), int(el.get("end"))],
        }
        bgps.append(_from_record(rec))
    return meta, bgps

