"""Simulated TPF client and log interleaving.

The client evaluates a BGP with a depth-first nested loop: rows produced by
one pattern are grouped by the values of the variables they share with the
next pattern, and each distinct binding is injected into a fresh request.
Every page request is logged the way a TPF server would see it.
"""

from __future__ import annotations

import itertools
import logging
import random
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .logio import LogEntry
from .rdf import Bgp, MappingSet, Term, TriplePattern, Variable
from .store import DEFAULT_PAGE_SIZE, Store

log = logging.getLogger(__name__)

_REQUEST_VARS = (Variable("s"), Variable("p"), Variable("o"))

Row = dict[Variable, Term]


@dataclass
class ClientConfig:
    ip: str = "127.0.0.1"
    probe_first: bool = False
    page_size: int = DEFAULT_PAGE_SIZE
    start: int = 1
    step: int = 1
    # scripted clock; overrides start/step when given
    timestamps: Sequence[int] | None = None

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("clock increment must be > 0")
        if self.page_size < 1:
            raise ValueError("page_size must be >= 1")

    def clock(self) -> Iterator[int]:
        if self.timestamps is not None:
            return iter(self.timestamps)
        return itertools.count(self.start, self.step)


def request_pattern(tp: TriplePattern) -> TriplePattern:
    """What the server sees: variables are anonymous, named ?s / ?p / ?o by position."""
    return TriplePattern(*(
        v if isinstance(t, Variable) else t for t, v in zip(tp, _REQUEST_VARS)
    ))


class _Session:
    def __init__(self, store: Store, cfg: ClientConfig):
        self.store = store
        self.cfg = cfg
        self.clock = cfg.clock()
        self.log: list[LogEntry] = []

    def _emit(self, req: TriplePattern, triples) -> None:
        try:
            ts = next(self.clock)
        except StopIteration:
            raise ValueError("scripted clock ran out of timestamps") from None
        outputs = MappingSet()
        for t in triples:
            for var, value in zip(req, t):
                if isinstance(var, Variable):
                    outputs.add(var, value)
        self.log.append(LogEntry(self.cfg.ip, ts, req, outputs))

    def probe(self, tp: TriplePattern) -> int:
        req = request_pattern(tp)
        frag = self.store.evaluate_fragment(req, 1, self.cfg.page_size)
        self._emit(req, frag.triples)
        return frag.total_count

    def fetch(self, tp: TriplePattern) -> list[Row]:
        """Request every page of ``tp`` and return the consistent bindings."""
        req = request_pattern(tp)
        page = 1
        rows = []
        while True:
            frag = self.store.evaluate_fragment(req, page, self.cfg.page_size)
            self._emit(req, frag.triples)
            for t in frag.triples:
                row: Row = {}
                for x, y in zip(tp, t):
                    if isinstance(x, Variable) and row.setdefault(x, y) != y:
                        break
                else:
                    rows.append(row)
            if page >= frag.last_page:
                return rows
            page += 1


def _substitute(tp: TriplePattern, row: Row) -> TriplePattern:
    return TriplePattern(*(row.get(t, t) if isinstance(t, Variable) else t for t in tp))


def join_order(query: Bgp, counts: Sequence[int] | None = None) -> list[TriplePattern]:
    if counts is None:
        return list(query.patterns)
    ranked = sorted(range(len(query.patterns)), key=lambda i: (counts[i], i))
    return [query.patterns[i] for i in ranked]


def execute_query(store: Store, query: Bgp, cfg: ClientConfig | None = None
                  ) -> tuple[list[Row], list[LogEntry]]:
    """Run ``query`` against ``store`` and return (solutions, server log)."""
    cfg = cfg or ClientConfig()
    if not query.patterns:
        raise ValueError("query has no triple patterns")
    if any(isinstance(tp.p, Variable) for tp in query.patterns):
        raise ValueError("unbound predicates are not supported")
    session = _Session(store, cfg)
    counts = [session.probe(tp) for tp in query.patterns] if cfg.probe_first else None
    order = join_order(query, counts)

    bound: set[Variable] = set()
    shared_at = []
    for tp in order:
        shared = [v for v in tp.variables() if v in bound]
        if bound and not shared:
            log.warning("cross product at pattern %s", tp)
        shared_at.append(shared)
        bound.update(tp.variables())

    solutions: list[Row] = []

    def run(level: int, rows: list[Row]) -> None:
        if level == len(order):
            solutions.extend(rows)
            return
        tp, shared = order[level], shared_at[level]
        groups: dict[tuple, list[Row]] = {}
        for row in rows:
            groups.setdefault(tuple(row[v] for v in shared), []).append(row)
        for key, group in groups.items():
            instance = _substitute(tp, dict(zip(shared, key)))
            matches = session.fetch(instance)
            extended = [{**row, **m} for row in group for m in matches]
            if extended:
                run(level + 1, extended)

    run(0, [{}])
    return solutions, session.log


# -- interleaving ---------------------------------------------------------------

ROUND_ROBIN = "round-robin"
RANDOM = "random"
OFFSET = "offset"


@dataclass
class ShufflePolicy:
    mode: str = ROUND_ROBIN
    seed: int = 0
    # per-log start delays, offset mode only
    delays: Sequence[int] = field(default_factory=tuple)
    start: int = 1

    def __post_init__(self):
        if self.mode not in (ROUND_ROBIN, RANDOM, OFFSET):
            raise ValueError(f"unknown shuffle mode {self.mode!r}")


def _round_robin(logs: Sequence[Sequence[LogEntry]]) -> list[int]:
    order = []
    for column in itertools.zip_longest(*[range(len(lg)) for lg in logs]):
        order.extend(i for i, pos in enumerate(column) if pos is not None)
    return order


def shuffle_logs(logs: Sequence[Sequence[LogEntry]], policy: ShufflePolicy | None = None
                 ) -> list[LogEntry]:
    """Interleave several logs into one, keeping each log's internal order.

    Output timestamps are reassigned to be strictly increasing. Round-robin
    and random interleavings number entries consecutively from
    ``policy.start``; offset mode shifts each log by its delay, merges by
    shifted time and bumps collisions forward by one tick.
    """
    policy = policy or ShufflePolicy()
    logs = [list(lg) for lg in logs]
    if policy.mode == ROUND_ROBIN:
        sources = _round_robin(logs)
    elif policy.mode == RANDOM:
        sources = [i for i, lg in enumerate(logs) for _ in lg]
        random.Random(policy.seed).shuffle(sources)
    else:
        return _offset_merge(logs, policy)
    cursors = [0] * len(logs)
    out = []
    ts = policy.start
    for i in sources:
        out.append(logs[i][cursors[i]].with_ts(ts))
        cursors[i] += 1
        ts += 1
    return out


def _offset_merge(logs: list[list[LogEntry]], policy: ShufflePolicy) -> list[LogEntry]:
    delays = list(policy.delays)
    if len(delays) != len(logs):
        raise ValueError("offset mode needs one delay per log")
    keyed = []
    for i, (lg, delay) in enumerate(zip(logs, delays)):
        if not lg:
            continue
        base = lg[0].ts
        keyed.extend((e.ts - base + delay, i, k) for k, e in enumerate(lg))
    keyed.sort()
    out = []
    prev = None
    for shifted, i, k in keyed:
        ts = shifted + policy.start
        if prev is not None and ts <= prev:
            ts = prev + 1
        out.append(logs[i][k].with_ts(ts))
        prev = ts
    return out

