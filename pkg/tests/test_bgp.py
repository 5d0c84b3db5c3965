import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tpflift import fixture_path
from tpflift.bgp import (
    DeducedBgp,
    VariableNamer,
    bgp_stats,
    dumps_document,
    extract_bgps,
    filter_self_joins,
    format_stats,
    is_pure_self_join,
    loads_document,
    to_document,
)
from tpflift.ctp import ctp_extraction
from tpflift.dtp import nested_loop_detection
from tpflift.logio import read_log
from tpflift.rdf import Bgp, JoinEdge, patterns_equal_up_to_renaming
from tpflift.syntax import ParseError, parse_query

from . import oracles
from .strategies import loop_logs


def _lift(log, gap):
    return extract_bgps(nested_loop_detection(ctp_extraction(log, gap), gap))


def test_worked_example_bgps(fig2b_log, q3, q4):
    # [PAPER] Q3 and Q4 rebuilt exactly at gap 8, constants restored
    bgps = _lift(fig2b_log, 8)
    assert [str(b.bgp) for b in bgps] == [
        "{?s_1 p2 toto . ?s_1 p1 ?o_1}",
        "{?s_2 p3 titi . ?s_2 p1 ?o_2 . ?s_2 p4 tata}",
    ]
    assert patterns_equal_up_to_renaming(bgps[0].bgp, q3)
    assert patterns_equal_up_to_renaming(bgps[1].bgp, q4)
    assert [b.support for b in bgps] == [(1, 3), (2, 4, 5)]
    assert [b.window for b in bgps] == [(1, 5), (2, 8)]
    # one detected join per dtp edge, the closure adds p1-p4
    assert bgps[1].joins == (JoinEdge(0, "subject", 1, "subject"), JoinEdge(0, "subject", 2, "subject"))
    assert len(bgps[1].bgp.joins) == 3


def test_gap_1_leaves_single_patterns(fig2b_log):
    # [DERIVED] no edges, so one BGP per dtp (7: ctps (1,1) (2,2) (3,3) (4,4) (5,6) (7,7) (8,8))
    bgps = _lift(fig2b_log, 1)
    assert len(bgps) == 7
    assert all(len(b.patterns) == 1 for b in bgps)
    # a placeholder with several inputs stays a variable, a single one is restored
    assert {str(b.bgp) for b in bgps} >= {"{?s_1 p2 toto}", "{?s_3 p1 ?o_2}"}


def test_namer_shared_across_calls():
    namer = VariableNamer()
    assert [namer.fresh("s"), namer.fresh("o"), namer.fresh("s")] == [
        parse_query("SELECT * WHERE { ?s_1 p ?o_1 }").patterns[0].s,
        parse_query("SELECT * WHERE { ?s_1 p ?o_1 }").patterns[0].o,
        parse_query("SELECT * WHERE { ?s_2 p ?o }").patterns[0].s,
    ]


@given(loop_logs(), st.one_of(st.integers(1, 6), st.just(math.inf)))
def test_one_bgp_per_component(log, gap):
    # [DERIVED] component count by breadth-first search over the dtp edges
    graph = nested_loop_detection(ctp_extraction(log, gap), gap)
    bgps = extract_bgps(graph)
    edges = [(e.parent - 1, e.child - 1) for e in graph.edges]
    assert len(bgps) == oracles.components(len(graph.nodes), edges)
    assert sorted(i for b in bgps for i in b.support) == [n.id for n in graph.nodes]
    for b in bgps:
        # every detected join is among the joins implied by the shared variables
        implied = {(j.a, j.pos_a, j.b, j.pos_b) for j in b.bgp.joins}
        implied |= {(j.b, j.pos_b, j.a, j.pos_a) for j in b.bgp.joins}
        assert all((j.a, j.pos_a, j.b, j.pos_b) in implied for j in b.joins)


def _q7_bgps():
    entries, _ = read_log(fixture_path("q7.log"))
    graph = nested_loop_detection(ctp_extraction(entries))
    windows = {n.id: (n.ts_min, n.ts_max) for n in graph.nodes}
    return extract_bgps(graph), windows


def test_q7_self_join_artifact():
    # [PAPER] the probe request of the author pattern joins the inner loop on itself
    bgps, _ = _q7_bgps()
    assert [str(b.bgp) for b in bgps] == [
        "{?s_1 type Book . ?s_1 author ?o_3}",
        "{?s_2 author ?o_1 . ?s_2 author ?o_2}",
    ]
    assert all(is_pure_self_join(bgps[1], j) for j in bgps[1].joins)
    assert not any(is_pure_self_join(bgps[0], j) for j in bgps[0].joins)


def test_filter_self_joins_drops_pure_self_join_bgps():
    bgps, windows = _q7_bgps()
    kept = filter_self_joins(bgps, windows)
    assert [str(b.bgp) for b in kept] == ["{?s_1 type Book . ?s_1 author ?o_3}"]


def test_filter_resplits_when_self_join_was_the_bridge():
    q = parse_query("SELECT * WHERE { ?a p ?b . ?a p ?c . ?c q ?d }")
    d = DeducedBgp(q, (JoinEdge(0, "subject", 1, "subject"), JoinEdge(1, "object", 2, "subject")),
                   (1, 2, 3), (1, 9))
    out = filter_self_joins([d], {1: (1, 2), 2: (3, 4), 3: (5, 9)})
    assert [str(b.bgp) for b in out] == ["{?a p ?b}", "{?a p ?c . ?c q ?d}"]
    assert [b.window for b in out] == [(1, 2), (3, 9)]
    assert out[1].joins == (JoinEdge(0, "object", 1, "subject"),)


def test_self_join_needs_same_shape():
    q = parse_query("SELECT * WHERE { ?a p ?b . ?a p k }")
    d = DeducedBgp(q, (JoinEdge(0, "subject", 1, "subject"),), (1, 2), (1, 2))
    assert not is_pure_self_join(d, d.joins[0])
    q = parse_query("SELECT * WHERE { ?a p ?b . ?b p ?c }")
    d = DeducedBgp(q, (JoinEdge(0, "object", 1, "subject"),), (1, 2), (1, 2))
    assert not is_pure_self_join(d, d.joins[0])


@pytest.mark.parametrize("fmt", ["canonical", "xml"])
def test_document_round_trip(fig2b_log, fmt):
    bgps = _lift(fig2b_log, 8)
    meta = {"gap": 8, "input": "fig2b.log"}
    text = dumps_document(to_document(bgps, meta), fmt)
    meta2, back = loads_document(text)
    assert meta2 == meta
    assert back == bgps


def test_canonical_is_json_one_record_per_line(fig2b_log):
    import json

    text = dumps_document(to_document(_lift(fig2b_log, 8), {"gap": 8}))
    lines = text.splitlines()
    assert len(lines) == 2 + 2 + 1
    assert json.loads(text)["bgps"][0]["patterns"] == ["?s_1 p2 toto", "?s_1 p1 ?o_1"]
    assert json.loads(dumps_document(to_document([], {}))) == {"meta": {}, "bgps": []}


@pytest.mark.parametrize("text", [
    "{}",
    '{"bgps": [{"patterns": ["a b"], "joins": [], "support": [], "window": [0, 0]}]}',
    '{"bgps": [{"patterns": ["?a p ?b"], "joins": [[0, "subject", 3, "subject"]], "support": [1], "window": [0, 0]}]}',
    '{"bgps": [{"patterns": ["?a p ?b"], "joins": [[0, "middle", 0, "subject"]], "support": [1], "window": [0, 0]}]}',
    "<bgps><bgp",
])
def test_bad_documents(text):
    with pytest.raises(ParseError):
        loads_document(text)


def test_stats(fig2b_log):
    report = bgp_stats(_lift(fig2b_log, 8))
    assert report["joins"] == {"subject-subject": 3, "subject-object": 0, "object-object": 0}
    assert report["sizes"] == {"2": 1, "3": 1}
    assert report["predicates"]["p1"] == 2
    assert "subject-subject\t3" in format_stats(report)


def test_bgp_equality_is_structural():
    a = parse_query("SELECT * WHERE { ?x p ?y }")
    assert Bgp(a.patterns) == a
