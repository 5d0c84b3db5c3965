import io

import pytest

from tpflift.rdf import IRI, Literal, Triple, TriplePattern, Variable
from tpflift.syntax import (
    ParseError,
    format_query,
    parse_query,
    read_triples,
    tokenize,
    write_triples,
)


def test_tokenize_splits_terminator():
    assert tokenize('c1 p1 "a b"@en .') == ["c1", "p1", '"a b"@en', "."]
    assert tokenize("c1 p1 a.") == ["c1", "p1", "a", "."]
    assert tokenize("<http://x/a.> p o") == ["<http://x/a.>", "p", "o"]


def test_read_triples_with_prefixes_and_comments():
    text = [
        "# comment",
        "@prefix ex: <http://ex.org/> .",
        "",
        'ex:a ex:name "Ann"@en .',
        "ex:a ex:knows <http://ex.org/b>",
    ]
    assert read_triples(text) == [
        Triple(IRI("http://ex.org/a"), IRI("http://ex.org/name"), Literal("Ann", "en")),
        Triple(IRI("http://ex.org/a"), IRI("http://ex.org/knows"), IRI("http://ex.org/b")),
    ]


@pytest.mark.parametrize("line, lineno", [
    ("a p", 1),
    ("a p o extra .", 1),
    ("?x p o .", 1),
    ('a "p" o .', 1),
])
def test_read_triples_errors_carry_line_numbers(line, lineno):
    with pytest.raises(ParseError) as err:
        read_triples([line])
    assert err.value.lineno == lineno


def test_write_read_round_trip():
    triples = [
        Triple(IRI("a"), IRI("p"), Literal('quote " and \\ back', "fr")),
        Triple(IRI("http://x.org/a b".replace(" ", "_")), IRI("p"), IRI("b.")),
    ]
    buf = io.StringIO()
    write_triples(triples, buf)
    assert read_triples(buf.getvalue().splitlines()) == triples


def test_parse_query_q3():
    # [PAPER] Q3 of the worked example
    q = parse_query("SELECT ?x ?y WHERE { ?x p2 toto . ?x p1 ?y }")
    assert q.patterns == (
        TriplePattern(Variable("x"), IRI("p2"), IRI("toto")),
        TriplePattern(Variable("x"), IRI("p1"), Variable("y")),
    )


def test_parse_query_prefixes_and_dedup():
    q = parse_query(
        "PREFIX rdfs: <http://www.w3.org/2000/01/rdf-schema#>\n"
        "SELECT DISTINCT * WHERE {\n ?a rdfs:label ?l .\n ?a rdfs:label ?l .\n}"
    )
    assert q.patterns == (
        TriplePattern(Variable("a"), IRI("http://www.w3.org/2000/01/rdf-schema#label"), Variable("l")),
    )


@pytest.mark.parametrize("text", [
    "",
    "ASK { ?x p o }",
    "SELECT * WHERE { }",
    "SELECT * WHERE { ?x p }",
    "SELECT * WHERE { ?x p o . FILTER(?x) }",
    "SELECT * WHERE { ?x p o . OPTIONAL { ?x q ?y } }",
    "SELECT * WHERE { ?x p o",
    'SELECT * WHERE { ?x "lit" o }',
    "SELECT foo WHERE { ?x p o }",
])
def test_parse_query_rejects(text):
    with pytest.raises(ParseError):
        parse_query(text)


def test_format_query_round_trip():
    q = parse_query('SELECT * WHERE { ?x p3 titi . ?x p4 "t a"@en . ?x p1 ?y }')
    assert parse_query(format_query(q)) == q
