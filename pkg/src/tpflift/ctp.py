"""Aggregation of log entries into candidate triple patterns (ctps).

A ctp groups requests from one client that share a template (the request
with its bound subject/object replaced by placeholders) and that follow
each other within ``gap`` time units. Those are suspected to be the
iterations of one inner loop, or the pages of one outer request.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .logio import LogEntry
from .rdf import MappingSet, TriplePattern, Value, Variable, display_term, template_of

UNBOUNDED = math.inf


@dataclass(slots=True)
class Constituent:
    """One log entry absorbed by a ctp."""

    index: int
    ts: int
    injected: dict[Variable, Value]
    outputs: MappingSet


@dataclass(slots=True, eq=False)
class Ctp:
    id: int
    ip: str
    ts_min: int
    ts_max: int
    template: TriplePattern
    outputs: MappingSet = field(default_factory=MappingSet)
    inputs: MappingSet = field(default_factory=MappingSet)
    provenance: list[Constituent] = field(default_factory=list)

    def absorb(self, c: Constituent) -> None:
        self.provenance.append(c)
        self.outputs.update(c.outputs)
        for var, value in c.injected.items():
            self.inputs.add(var, value)
        if c.ts > self.ts_max:
            self.ts_max = c.ts

    def recompute(self) -> None:
        """Rebuild timestamps and mappings from the provenance alone."""
        self.outputs = MappingSet()
        self.inputs = MappingSet()
        self.ts_min = min(c.ts for c in self.provenance)
        self.ts_max = max(c.ts for c in self.provenance)
        for c in self.provenance:
            self.outputs.update(c.outputs)
            for var, value in c.injected.items():
                self.inputs.add(var, value)

    def describe(self) -> str:
        def fmt(ms: MappingSet) -> str:
            return " ".join(
                f"{display_term(var)}:{{{','.join(map(str, vals))}}}" for var, vals in ms.items()
            ) or "-"

        tp = " ".join(display_term(t) for t in self.template)
        return f"{self.ts_min},{self.ts_max}\t{tp}\t{fmt(self.outputs)}\t{fmt(self.inputs)}"


def ingap(later_ts_min: float, earlier_ts_max: float, gap: float) -> bool:
    """True if the later range starts at most ``gap`` after the earlier one ends."""
    return later_ts_min - earlier_ts_max <= gap


def ctp_extraction(log: Sequence[LogEntry], gap: float = UNBOUNDED) -> list[Ctp]:
    """Fold a time-ordered log into ctps.

    An entry joins the most recently created ctp with the same ip and
    template whose upper timestamp is within ``gap``; otherwise it opens a
    new ctp. Only the upper timestamp of a ctp grows.
    """
    if gap < 0:
        raise ValueError("gap must be >= 0")
    ctps: list[Ctp] = []
    # With a time-ordered log an older ctp of the same key always ends before
    # the newest one, so only the newest can still be within the gap.
    latest: dict[tuple[str, TriplePattern], Ctp] = {}
    for index, e in enumerate(log):
        template, injected = template_of(e.tp)
        key = (e.ip, template)
        target = latest.get(key)
        if target is None or not ingap(e.ts, target.ts_max, gap):
            target = Ctp(len(ctps) + 1, e.ip, e.ts, e.ts, template)
            ctps.append(target)
            latest[key] = target
        target.absorb(Constituent(index, e.ts, injected, e.outputs))
    return ctps


def format_ctps(ctps: Sequence[Ctp]) -> str:
    lines = ["id\tts\ttp\tmu_o\tmu_i"]
    lines += [f"{c.id}\t{c.describe()}" for c in ctps]
    return "\n".join(lines) + "\n"
