import random
from fractions import Fraction

from hypothesis import given
from hypothesis import strategies as st

from tpflift.metrics import _pair_score, evaluate, format_sweep, ratio, unique_bgps
from tpflift.rdf import Bgp, IRI, TriplePattern, Variable
from tpflift.syntax import parse_query
from tpflift.workload import random_world

from . import oracles

Q1 = (
    "PREFIX dbpedia-owl: <http://dbpedia.org/ontology/>\n"
    "PREFIX rdfs: <http://www.w3.org/2000/01/rdf-schema#>\n"
    "SELECT ?movie ?title ?name WHERE {\n"
    "  ?movie dbpedia-owl:starring ?actor .\n"
    '  ?actor rdfs:label "Brad Pitt"@en .\n'
    "  ?movie rdfs:label ?title .\n"
    "  ?movie dbpedia-owl:director ?director .\n"
    "  ?director rdfs:label ?name .\n"
    "}\n"
)


def _renamed(bgp, suffix="_r"):
    def r(t):
        return Variable(t.name + suffix) if isinstance(t, Variable) else t

    return Bgp(tuple(TriplePattern(r(tp.s), tp.p, r(tp.o)) for tp in bgp.patterns))


def test_ratio_empty_is_one():
    assert ratio(0, 0) == 1
    assert ratio(1, 4) == Fraction(1, 4)


def test_q1_four_of_five():
    # [PAPER] precision 4/4, recall 4/5; quality is their mean, 9/10
    q1 = parse_query(Q1)
    partial = _renamed(Bgp(q1.patterns[:4]))
    r = evaluate([partial], [q1])
    assert (r.tp_precision, r.tp_recall, r.tp_quality) == (1, Fraction(4, 5), Fraction(9, 10))
    # [DERIVED] closure joins: 4 of the 5 survive without the director label pattern
    assert (r.join_precision, r.join_recall) == (1, Fraction(4, 5))
    assert r.quality == Fraction(9, 10)


def test_unmatched_truth_and_noise():
    q3 = parse_query("SELECT * WHERE { ?x p2 toto . ?x p1 ?y }")
    q4 = parse_query("SELECT * WHERE { ?x p3 titi . ?x p4 tata . ?x p1 ?y }")
    noise = parse_query("SELECT * WHERE { ?z p9 ?w }")
    r = evaluate([_renamed(q3), noise], [q3, q4])
    # [DERIVED] 2 of 3 deduced patterns, 2 of 5 truth patterns; 1 of 1 joins, 1 of 4
    assert (r.tp_precision, r.tp_recall) == (Fraction(2, 3), Fraction(2, 5))
    assert (r.join_precision, r.join_recall) == (1, Fraction(1, 4))
    assert r.unmatched_deduced == [1]
    assert r.per_query[1].deduced is None and r.per_query[1].tp_precision == 0
    assert r.macro()["tp_recall"] == Fraction(1, 2)


def test_truth_duplicates_collapse():
    q = parse_query("SELECT * WHERE { ?x p ?y }")
    assert len(unique_bgps([q, _renamed(q), q])) == 1
    assert evaluate([q], [q, _renamed(q)]).all_ones()
    assert not evaluate([q], [q, _renamed(q)], collapse_duplicates=False).all_ones()


def test_empty_inputs():
    assert evaluate([], []).all_ones()
    r = evaluate([], [parse_query("SELECT * WHERE { ?x p ?y }")])
    assert r.tp_recall == 0 and r.tp_precision == 1


@given(st.integers(0, 100_000), st.integers(1, 4))
def test_evaluate_self_is_one(seed, count):
    # metric identity: any query set scored against a renamed copy of itself
    rng = random.Random(seed)
    queries = [random_world(rng, f"http://m{k}.example/").query for k in range(count)]
    shuffled = [_renamed(q) for q in queries]
    rng.shuffle(shuffled)
    assert evaluate(shuffled, queries).all_ones()
    assert evaluate(queries, queries).all_ones()


preds = st.sampled_from(["p", "q"]).map(IRI)
small_bgps = st.lists(
    st.builds(TriplePattern, st.sampled_from("ab").map(Variable), preds, st.sampled_from("abc").map(Variable)),
    min_size=1, max_size=2, unique=True,
).map(lambda ps: Bgp(tuple(ps)))


@given(st.lists(small_bgps, min_size=1, max_size=3), st.lists(small_bgps, min_size=1, max_size=3))
def test_assignment_is_optimal(truth, deduced):
    # [DERIVED] brute force over every one-to-one pairing of truth and deduced
    truth = unique_bgps(truth)
    r = evaluate(deduced, truth)
    big = 1000
    weights = []
    for t in truth:
        row = []
        for d in deduced:
            m, j = oracles.best_score(t.patterns, d.patterns)
            row.append(m * big + j)
        weights.append(row)
    best = oracles.brute_force_assignment(weights)
    got = sum(q.matched_patterns * big + q.matched_joins for q in r.per_query)
    assert got == best


@given(small_bgps, small_bgps)
def test_pair_score_joins_consistent(t, d):
    m, tj, dj = _pair_score(t, d)
    assert tj == dj
    assert m <= min(len(t.patterns), len(d.patterns))


def test_report_outputs():
    q1 = parse_query(Q1)
    r = evaluate([Bgp(q1.patterns[:4])], [q1])
    d = r.to_dict()
    assert d["micro"]["tp_recall"] == 0.8
    assert d["macro"]["quality"] == 0.9
    assert d["per_query"][0]["patterns"] == [4, 5, 4]
    assert "tp_quality" in r.format_table()
    assert format_sweep([("1%", r)]).splitlines()[1].split() == [
        "1%", "1.0000", "0.8000", "1.0000", "0.8000", "0.9000",
    ]
