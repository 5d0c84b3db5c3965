#!/usr/bin/env python3
"""Regenerate the files under src/tpflift/fixtures.

    python3 scripts/build_fixtures.py [--check]

With --check nothing is written; the script exits 1 if a fixture on disk
differs from what it would generate.
"""

import argparse
import io
import random
import sys
from pathlib import Path

from tpflift.client import ClientConfig, ShufflePolicy, execute_query, shuffle_logs
from tpflift.logio import write_log
from tpflift.rdf import IRI, Triple
from tpflift.store import Store
from tpflift.syntax import format_query, parse_query, read_triples, write_triples
from tpflift.workload import disjoint_worlds, random_world

ROOT = Path(__file__).resolve().parent.parent / "src" / "tpflift" / "fixtures"

FIG2_STORE = """\
c1 p2 toto .
c2 p2 toto .
c3 p3 titi .
c4 p3 titi .
c1 p1 a .
c2 p1 b .
c3 p1 c .
c4 p1 d .
c3 p4 tata .
c4 p4 tata .
"""

# the client of the worked example evaluates p4 before p1
Q3 = "SELECT * WHERE { ?x p2 toto . ?x p1 ?y }\n"
Q4 = "SELECT * WHERE { ?x p3 titi . ?x p4 tata . ?x p1 ?y }\n"

Q7 = "SELECT * WHERE { ?s type Book . ?s author ?o }\n"


def q7_store() -> str:
    lines = [f"book{k} type Book ." for k in range(1, 6)]
    lines += [f"book{k} author writer{k} ." for k in range(1, 6)]
    lines += [f"article{k} author writer{k + 5} ." for k in range(1, 4)]
    return "\n".join(lines) + "\n"


def render_log(entries) -> str:
    buf = io.StringIO()
    write_log(entries, buf)
    return buf.getvalue()


def render_triples(triples) -> str:
    buf = io.StringIO()
    write_triples(sorted(triples, key=str), buf)
    return buf.getvalue()


def fig2_files() -> dict[str, str]:
    store = Store(read_triples(FIG2_STORE.splitlines()))
    ip = "172.16.0.1"
    _, la = execute_query(store, parse_query(Q3), ClientConfig(ip=ip, start=1, step=2))
    _, lc = execute_query(store, parse_query(Q4), ClientConfig(ip=ip, timestamps=[2, 4, 6, 7, 8]))
    lb = shuffle_logs([la, lc], ShufflePolicy(mode="round-robin"))
    return {
        "fig2_store.nt": FIG2_STORE,
        "q3.rq": Q3,
        "q4.rq": Q4,
        "fig2a.log": render_log(la),
        "fig2c.log": render_log(lc),
        "fig2b.log": render_log(lb),
    }


def q7_files() -> dict[str, str]:
    store = Store(read_triples(q7_store().splitlines()))
    _, lg = execute_query(store, parse_query(Q7), ClientConfig(ip="172.16.0.7", probe_first=True, page_size=4))
    return {"q7_store.nt": q7_store(), "q7.rq": Q7, "q7.log": render_log(lg)}


def mix_files(name: str, store: Store, queries, policy: ShufflePolicy,
              ip: str = "172.16.1.1") -> dict[str, str]:
    logs = [execute_query(store, q, ClientConfig(ip=ip))[1] for q in queries]
    mixed = shuffle_logs(logs, policy)
    files = {f"{name}/store.nt": render_triples(store), f"{name}/concurrent.log": render_log(mixed)}
    for k, (q, lg) in enumerate(zip(queries, logs), 1):
        files[f"{name}/q{k}.rq"] = format_query(q)
        files[f"{name}/q{k}.log"] = render_log(lg)
    return files


def shared_world():
    """Queries over one vocabulary: several share predicates and values."""
    rng = random.Random(11)
    triples = set(read_triples(FIG2_STORE.splitlines()))
    people = [IRI(f"c{k}") for k in range(1, 9)]
    for k, c in enumerate(people[4:], 5):
        triples.add(Triple(c, IRI("p2"), IRI("toto")))
        triples.add(Triple(c, IRI("p1"), IRI(f"v{k}")))
    for k in range(1, 9):
        triples.add(Triple(IRI(f"v{k}" if k > 4 else "abcd"[k - 1]), IRI("p5"), IRI(f"z{rng.randrange(3)}")))
    store = Store(triples)
    queries = [
        parse_query(Q3),
        parse_query(Q4),
        parse_query("SELECT * WHERE { ?x p1 ?y . ?y p5 ?z }"),
        parse_query("SELECT * WHERE { ?x p2 toto . ?x p1 ?y . ?y p5 z1 }"),
    ]
    return store, queries


def typed_world():
    """Queries that all start with a type pattern, on distinct classes."""
    rng = random.Random(23)
    worlds = [random_world(rng, f"http://typed{k}.example/", patterns=3, type_predicate=IRI("type"))
              for k in range(4)]
    return Store(t for w in worlds for t in w.triples), [w.query for w in worlds]


def all_files() -> dict[str, str]:
    files = {}
    files.update(fig2_files())
    files.update(q7_files())
    # sweep fixtures
    store, queries = disjoint_worlds(101, count=4)
    files.update(mix_files("mix_disjoint", store, queries, ShufflePolicy(mode="random", seed=1)))
    store, queries = typed_world()
    files.update(mix_files("mix_typed", store, queries, ShufflePolicy(mode="offset", delays=[0, 4, 9, 15])))
    # stress fixture: one vocabulary, one ip, request-level interleaving
    store, queries = shared_world()
    files.update(mix_files("stress_shared", store, queries, ShufflePolicy(mode="random", seed=2)))
    return files


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--check", action="store_true")
    args = ap.parse_args(argv)
    stale = []
    for rel, text in sorted(all_files().items()):
        path = ROOT / rel
        if args.check:
            if not path.exists() or path.read_text(encoding="utf-8") != text:
                stale.append(rel)
            continue
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        print(f"wrote {path.relative_to(ROOT.parent.parent.parent)}")
    if stale:
        print("stale fixtures: " + ", ".join(stale), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
