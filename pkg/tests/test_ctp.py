import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tpflift.ctp import ctp_extraction, format_ctps, ingap
from tpflift.rdf import OBJECT_IN, SUBJECT_IN, Variable, format_term

from . import oracles
from .strategies import loop_logs, sorted_logs


def _values(ms, var):
    return sorted(map(str, ms.get(var)))


def test_fig3b_ctp_list(fig2b_log):
    # [PAPER] 4 ctps with ranges (1,1), (2,2), (3,8), (4,7)
    ctps = ctp_extraction(fig2b_log, gap=8)
    assert [(c.ts_min, c.ts_max) for c in ctps] == [(1, 1), (2, 2), (3, 8), (4, 7)]
    assert [str(c.template) for c in ctps] == ["?s p2 ?_inO", "?s p3 ?_inO", "?_inS p1 ?o", "?_inS p4 ?_inO"]
    c3, c4 = ctps[2], ctps[3]
    assert _values(c3.outputs, Variable("o")) == ["a", "b", "c", "d"]
    assert _values(c3.inputs, SUBJECT_IN) == ["c1", "c2", "c3", "c4"]
    assert not c4.outputs
    assert _values(c4.inputs, SUBJECT_IN) == ["c3", "c4"]
    assert _values(c4.inputs, OBJECT_IN) == ["tata"]
    assert _values(ctps[0].inputs, OBJECT_IN) == ["toto"]


def test_small_gap_breaks_loops(fig2b_log):
    # [DERIVED] gap 1: p1 requests at 3, 5, 6, 8 give (3,3), (5,6), (8,8)
    ctps = ctp_extraction(fig2b_log, gap=1)
    p1 = [(c.ts_min, c.ts_max) for c in ctps if str(c.template.p) == "p1"]
    assert p1 == [(3, 3), (5, 6), (8, 8)]


def test_dump_uses_greek_placeholders(fig2b_log):
    text = format_ctps(ctp_extraction(fig2b_log, 8))
    assert "3\t3,8\t?σ p1 ?o\t?o:{a,b,c,d}\t?σ:{c1,c2,c3,c4}" in text


def test_negative_gap_rejected():
    with pytest.raises(ValueError):
        ctp_extraction([], gap=-1)


def test_ingap_boundary():
    assert ingap(10, 2, 8)
    assert not ingap(11, 2, 8)


gaps = st.one_of(st.integers(0, 10), st.just(math.inf))


@given(sorted_logs(max_size=30), gaps)
def test_matches_replay_oracle(log, gap):
    # [DERIVED] literal replay scanning every earlier group
    got = ctp_extraction(log, gap)
    expected = oracles.replay_ctp_extraction(log, gap)
    assert [[c.index for c in ctp.provenance] for ctp in got] == [g["indices"] for g in expected]
    assert [(c.ts_min, c.ts_max) for c in got] == [(g["ts_min"], g["ts_max"]) for g in expected]
    assert [tuple(map(format_term, c.template)) for c in got] == [g["template"] for g in expected]


@given(loop_logs(), gaps)
def test_partition_invariants(log, gap):
    ctps = ctp_extraction(log, gap)
    indices = sorted(c.index for ctp in ctps for c in ctp.provenance)
    assert indices == list(range(len(log)))
    for ctp in ctps:
        ts = [c.ts for c in ctp.provenance]
        assert (ctp.ts_min, ctp.ts_max) == (min(ts), max(ts))
        # consecutive entries are within the gap
        assert all(b - a <= gap for a, b in zip(ts, ts[1:]))
        assert {log[c.index].ip for c in ctp.provenance} == {ctp.ip}
        # mappings are the union of the constituents
        union = {(k, v) for c in ctp.provenance for k, vals in c.outputs.items() for v in vals}
        assert union == {(k, v) for k, vals in ctp.outputs.items() for v in vals}
    assert [c.id for c in ctps] == list(range(1, len(ctps) + 1))


@given(loop_logs(), st.integers(0, 6), st.integers(0, 6))
def test_ctp_count_monotone_in_gap(log, g1, g2):
    small, large = sorted((g1, g2))
    assert len(ctp_extraction(log, large)) <= len(ctp_extraction(log, small))
    assert len(ctp_extraction(log, math.inf)) <= len(ctp_extraction(log, large))
