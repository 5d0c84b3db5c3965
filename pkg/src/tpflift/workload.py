"""Random stores, queries and logs for experiments and tests.

Each generated query is a tree of triple patterns over its own namespace,
so two queries from different namespaces share no predicate and no
constant. The store is built around a few planted solutions plus noise
triples, which keeps every query non-empty while leaving the nested loops
something to filter.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .client import ClientConfig, ShufflePolicy, execute_query, shuffle_logs
from .logio import LogEntry
from .rdf import IRI, Bgp, Literal, Triple, TriplePattern, Variable
from .store import Store


@dataclass
class World:
    """A query with the triples it was generated against."""

    query: Bgp
    triples: list[Triple]


def random_world(rng: random.Random, ns: str, patterns: int | None = None,
                 entities: int = 12, solutions: int = 3, noise: int = 10,
                 type_predicate: IRI | None = None) -> World:
    """One random query and its data.

    With ``type_predicate`` the first pattern is ``?x0 <type_predicate>
    <ns>Class``: queries from different namespaces then share that predicate
    (and its request template) but no constant.
    """
    n = patterns or rng.randint(2, 4)
    variables = [Variable("x0")]
    tps: list[TriplePattern] = []
    if type_predicate is not None:
        tps.append(TriplePattern(variables[0], type_predicate, IRI(f"{ns}Class")))
    for i in range(len(tps), n):
        pred = IRI(f"{ns}p{i}")
        anchor = rng.choice(variables)
        roll = rng.random()
        if i > 0 and roll < 0.25:
            # constant object, joined on the subject
            obj: IRI | Literal = (Literal(f"{ns}lit{i}") if rng.random() < 0.5 else IRI(f"{ns}k{i}"))
            tps.append(TriplePattern(anchor, pred, obj))
            continue
        new = Variable(f"x{len(variables)}")
        variables.append(new)
        if roll < 0.7:
            tps.append(TriplePattern(anchor, pred, new))
        else:
            tps.append(TriplePattern(new, pred, anchor))

    # one pool per variable, like resources of distinct classes
    pools = {v: [IRI(f"{ns}{v.name}_{k}") for k in range(entities)] for v in variables}
    triples: set[Triple] = set()

    def ground(tp: TriplePattern, binding: dict) -> Triple:
        return Triple(*(binding[t] if isinstance(t, Variable) else t for t in tp))

    for _ in range(solutions):
        binding = {v: rng.choice(pools[v]) for v in variables}
        for tp in tps:
            triples.add(ground(tp, binding))
    for _ in range(noise):
        i = rng.randrange(n)
        tp = tps[i]
        binding = {v: rng.choice(pools[v]) for v in variables}
        triples.add(ground(tp, binding))
    return World(Bgp(tuple(tps)), sorted(triples, key=str))


def disjoint_worlds(seed: int, count: int = 2, **kw) -> tuple[Store, list[Bgp]]:
    """``count`` queries with pairwise disjoint predicates and constants, one store."""
    rng = random.Random(seed)
    worlds = [random_world(rng, f"http://q{seed}-{k}.example/", **kw) for k in range(count)]
    store = Store(t for w in worlds for t in w.triples)
    return store, [w.query for w in worlds]


def isolated_logs(store: Store, queries: Sequence[Bgp], ip: str = "10.0.0.1",
                  probe_first: bool = False, page_size: int = 100) -> list[list[LogEntry]]:
    logs = []
    for q in queries:
        _, lg = execute_query(store, q, ClientConfig(ip=ip, probe_first=probe_first, page_size=page_size))
        logs.append(lg)
    return logs


def repeat_executions(templates: Sequence[Sequence[LogEntry]], total: int, seed: int = 0,
                      ips: int = 50, spread: int = 4) -> list[LogEntry]:
    """Replay logs round after round until ``total`` entries, interleaved by time.

    Each execution is a copy of one template log with its own ip and a
    random start offset; executions are merged in offset order.
    """
    rng = random.Random(seed)
    runs = []
    delays = []
    produced = 0
    clock = 0
    while produced < total:
        for k, lg in enumerate(templates):
            if produced >= total or not lg:
                continue
            take = lg[: total - produced]
            ip = f"10.{k % 250}.{rng.randrange(ips)}.1"
            runs.append([LogEntry(ip, e.ts, e.tp, e.outputs) for e in take])
            delays.append(clock + rng.randrange(spread * len(take) + 1))
            produced += len(take)
        clock += spread * max(len(lg) for lg in templates)
    return shuffle_logs(runs, ShufflePolicy(mode="offset", delays=delays))
