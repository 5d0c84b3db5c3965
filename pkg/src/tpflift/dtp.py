"""Nested-loop join detection over a ctp list.

A ctp whose input mappings on some placeholder are all contained in the
output mappings of an earlier ctp is the inner loop of a join with it. When
the two only intersect, the later ctp mixes several loops and is split
entry by entry so that the part fed by the earlier ctp becomes a node of
its own.

Each ctp is tracked as an ordered list of pieces. A split carves a new
piece out of an existing one; the carved piece goes before the piece it
came from, so the original remainder always comes last. Once traversal
reaches a ctp, its pieces are final: only earlier nodes can split it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .ctp import UNBOUNDED, Ctp, ingap
from .rdf import MappingSet, Variable, display_term


class Dtp(Ctp):
    """A deduced triple pattern: a ctp or a piece split off one."""

    __slots__ = ("origin",)

    def __init__(self, origin: int, **fields):
        super().__init__(**fields)
        self.origin = origin

    @classmethod
    def from_ctp(cls, c: Ctp) -> Dtp:
        return cls(
            c.id,
            id=c.id,
            ip=c.ip,
            ts_min=c.ts_min,
            ts_max=c.ts_max,
            template=c.template,
            # shared, not copied: split() replaces these, it never edits them
            outputs=c.outputs,
            inputs=c.inputs,
            provenance=c.provenance,
        )

    def __repr__(self):
        return f"Dtp(id={self.id}, origin={self.origin}, {self.describe()!r})"


@dataclass(frozen=True)
class DtpEdge:
    parent: int
    child: int
    parent_var: Variable
    child_var: Variable


@dataclass
class DtpGraph:
    nodes: list[Dtp]
    edges: list[DtpEdge]
    splits: list[tuple[int, int]]

    def node(self, dtp_id: int) -> Dtp:
        return self.nodes[dtp_id - 1]

    def describe(self) -> str:
        lines = ["id\tctp\tts\ttp\tmu_o\tmu_i"]
        lines += [f"{n.id}\t{n.origin}\t{n.describe()}" for n in self.nodes]
        lines.append("edges:")
        lines += [
            f"{e.parent} -> {e.child} ({display_term(e.parent_var)}, {display_term(e.child_var)})"
            for e in self.edges
        ]
        lines.append("splits: " + " ".join(f"split({c},{d})" for c, d in self.splits))
        return "\n".join(lines) + "\n"


class SplitError(ValueError):
    pass


def split(target: Ctp, target_var: Variable, source: Ctp, source_var: Variable) -> Dtp:
    """Carve out of ``target`` the entries whose injected ``target_var`` value
    is an output of ``source`` on ``source_var``.

    ``target`` shrinks in place to the other entries; the carved entries are
    returned as a new piece with timestamps and mappings rebuilt from them.
    """
    wanted = source.outputs.get(source_var)
    have = target.inputs.get(target_var)
    common = sum(1 for v in have if v in wanted)
    if common == 0:
        raise SplitError("no intersection to split on")
    if common == len(have):
        raise SplitError("input mappings already included, nothing to split")
    taken, kept = [], []
    for c in target.provenance:
        (taken if c.injected.get(target_var) in wanted else kept).append(c)
    origin = target.origin if isinstance(target, Dtp) else target.id
    piece = Dtp(
        origin,
        id=0,
        ip=target.ip,
        ts_min=0,
        ts_max=0,
        template=target.template,
        outputs=MappingSet(),
        inputs=MappingSet(),
        provenance=taken,
    )
    piece.recompute()
    target.provenance = kept
    target.recompute()
    return piece


def _partition_in_gap(target: Dtp, target_var: Variable, wanted, source: Dtp, gap: float) -> bool:
    """Would the carved piece still start within ``gap`` of the source?"""
    starts = [c.ts for c in target.provenance if c.injected.get(target_var) in wanted]
    return bool(starts) and ingap(min(starts), source.ts_max, gap)


def nested_loop_detection(ctps: Sequence[Ctp], gap: float = UNBOUNDED) -> DtpGraph:
    """Build the DTP graph from a ctp list (ids must follow list order).

    Sources are visited in list order, later ctps in gap by position, and
    each of their current pieces in turn. Inclusion wins over splitting: a
    piece whose inputs on some placeholder are all outputs of the source is
    linked (to the smallest including output variable, ties by name) and
    never split by that source. Otherwise the first intersecting (output
    variable, placeholder) pair, both by name, splits it. Input ctps are not
    modified.
    """
    pieces: list[list[Dtp]] = [[Dtp.from_ctp(c)] for c in ctps]
    split_ctps: set[int] = set()

    # input value -> positions of the ctps injecting it, on either placeholder
    holders: dict[object, set[int]] = {}
    for pos, c in enumerate(ctps):
        for _, values in c.inputs.items():
            for v in values:
                holders.setdefault(v, set()).add(pos)

    order: list[Dtp] = []
    links: list[tuple[Dtp, Dtp, Variable, Variable]] = []

    for pos in range(len(ctps)):
        for src in pieces[pos]:
            order.append(src)
            outs = sorted(src.outputs.items(), key=lambda kv: kv[0].name)
            targets: set[int] = set()
            for _, values in outs:
                for value in values:
                    found = holders.get(value)
                    if found:
                        targets.update(found)
            targets = {t for t in targets if t > pos}
            for tpos in sorted(targets):
                for piece in list(pieces[tpos]):
                    if not ingap(piece.ts_min, src.ts_max, gap):
                        continue
                    included = {}
                    partial = []
                    for v_i, have in sorted(piece.inputs.items(), key=lambda kv: kv[0].name):
                        for v_o, wanted in outs:
                            if have <= wanted:
                                best = included.get(v_i)
                                if best is None or len(wanted) < len(best[1]):
                                    included[v_i] = (v_o, wanted)
                            elif not wanted.isdisjoint(have):
                                partial.append((v_o, wanted, v_i))
                    if included:
                        for v_i, (v_o, _) in included.items():
                            links.append((src, piece, v_o, v_i))
                        continue
                    for v_o, wanted, v_i in sorted(partial, key=lambda t: (t[0].name, t[2].name)):
                        if not _partition_in_gap(piece, v_i, wanted, src, gap):
                            continue
                        carved = split(piece, v_i, src, v_o)
                        plist = pieces[tpos]
                        at = next(i for i, p in enumerate(plist) if p is piece)
                        plist.insert(at, carved)
                        split_ctps.add(ctps[tpos].id)
                        links.append((src, carved, v_o, v_i))
                        break

    for i, node in enumerate(order, 1):
        node.id = i
    splits = [(n.origin, n.id) for n in order if n.origin in split_ctps]

    edges = []
    seen = set()
    for parent, child, v_o, v_i in links:
        # a child that shrank after being linked may have drifted out of the gap
        if not ingap(child.ts_min, parent.ts_max, gap):
            continue
        edge = DtpEdge(parent.id, child.id, v_o, v_i)
        if edge not in seen:
            seen.add(edge)
            edges.append(edge)
    return DtpGraph(order, edges, splits)
