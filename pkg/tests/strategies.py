"""Hypothesis strategies shared by the property tests."""

from hypothesis import strategies as st

from tpflift.logio import LogEntry
from tpflift.rdf import IRI, Literal, MappingSet, TriplePattern, Variable

names = st.text(alphabet="abcdefgh", min_size=1, max_size=3)

iris = st.one_of(
    names.map(IRI),
    st.text(alphabet="abc/:#.-é", min_size=1, max_size=8).map(lambda s: IRI("http://x.org/" + s)),
)
literals = st.builds(
    Literal,
    st.text(max_size=6),
    st.one_of(st.none(), st.sampled_from(["en", "fr", "en-GB"])),
)
values = st.one_of(iris, literals)
variables = st.sampled_from(["s", "o", "x", "y"]).map(Variable)


@st.composite
def request_patterns(draw):
    s = draw(st.one_of(variables, iris))
    p = draw(iris)
    o = draw(st.one_of(variables, values))
    return TriplePattern(s, p, o)


@st.composite
def log_entries(draw, ips=("10.0.0.1", "10.0.0.2"), max_ts=60):
    tp = draw(request_patterns())
    outputs = MappingSet()
    for v in tp.variables():
        for value in draw(st.lists(values, max_size=3)):
            outputs.add(v, value)
    return LogEntry(draw(st.sampled_from(ips)), draw(st.integers(0, max_ts)), tp, outputs)


def sorted_logs(min_size=0, max_size=30, **kw):
    return st.lists(log_entries(**kw), min_size=min_size, max_size=max_size).map(
        lambda es: sorted(es, key=lambda e: e.ts)
    )


# small random "nested loop" logs built from a few templates and a shared value pool
POOL = [IRI(f"v{k}") for k in range(6)]
PREDS = [IRI(f"p{k}") for k in range(3)]


@st.composite
def loop_logs(draw, max_size=25):
    n = draw(st.integers(1, max_size))
    ts = 0
    out = []
    for _ in range(n):
        ts += draw(st.integers(0, 3))
        p = draw(st.sampled_from(PREDS))
        shape = draw(st.sampled_from(["free", "inS", "inO"]))
        s = draw(st.sampled_from(POOL)) if shape == "inS" else Variable("s")
        o = draw(st.sampled_from(POOL)) if shape == "inO" else Variable("o")
        tp = TriplePattern(s, p, o)
        outputs = MappingSet()
        for v in tp.variables():
            for value in draw(st.lists(st.sampled_from(POOL), max_size=3)):
                outputs.add(v, value)
        out.append(LogEntry(draw(st.sampled_from(["a", "b"])), ts, tp, outputs))
    return out
