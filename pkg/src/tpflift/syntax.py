"""Line-oriented triple files and the minimal SELECT query syntax."""

from __future__ import annotations

import re
from pathlib import Path
from typing import Iterable, TextIO

from .rdf import Bgp, Literal, Triple, TriplePattern, parse_term

_TOKEN = re.compile(
    r'"(?:[^"\\]|\\.)*"(?:@[A-Za-z]+(?:-[A-Za-z0-9]+)*)?'  # literal
    r"|<[^<>\s]*>"  # bracketed IRI
    r"|[{}]"
    r'|[^\s{}"<]+'  # bare token, may end with '.'
)
_PREFIX_DECL = re.compile(r"@prefix\s+([\w-]*):\s*<([^<>\s]*)>\s*\.?\s*$")


class ParseError(ValueError):
    """Malformed input; ``lineno`` is 1-based when known."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}" if lineno else message)


def tokenize(text: str, lineno: int | None = None) -> list[str]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"cannot tokenize near {text[pos:pos + 20]!r}", lineno)
        tok = m.group()
        pos = m.end()
        # a bare token glued to the statement terminator
        if len(tok) > 1 and tok.endswith(".") and tok[0] not in '"<':
            tokens.append(tok[:-1])
            tokens.append(".")
        else:
            tokens.append(tok)
    return tokens


def _open_lines(source) -> Iterable[str]:
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            yield from fh
    else:
        yield from source


def parse_triple_line(line: str, prefixes=None, lineno: int | None = None) -> Triple:
    tokens = tokenize(line, lineno)
    if tokens and tokens[-1] == ".":
        tokens.pop()
    if len(tokens) != 3:
        raise ParseError(f"expected 3 terms, got {len(tokens)}", lineno)
    try:
        s, p, o = (parse_term(t, prefixes) for t in tokens)
        return Triple(s, p, o)
    except ValueError as exc:
        raise ParseError(str(exc), lineno) from None


def read_triples(source) -> list[Triple]:
    """Read a triple file (path or iterable of lines).

    One triple per line, three whitespace-separated terms and an optional
    trailing ``.``; ``#`` starts a comment line; ``@prefix p: <iri> .`` declares
    a prefix for later lines.
    """
    prefixes: dict[str, str] = {}
    triples = []
    for lineno, line in enumerate(_open_lines(source), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("@prefix"):
            m = _PREFIX_DECL.match(stripped)
            if not m:
                raise ParseError("malformed @prefix declaration", lineno)
            prefixes[m.group(1)] = m.group(2)
            continue
        triples.append(parse_triple_line(stripped, prefixes, lineno))
    return triples


def write_triples(triples: Iterable[Triple], out: TextIO) -> None:
    for t in triples:
        out.write(f"{t}\n")


def parse_query(text: str) -> Bgp:
    """Parse ``[PREFIX p: <iri>]* SELECT ... WHERE { tp . tp ... }`` into a BGP.

    The projection is ignored. FILTER, OPTIONAL and UNION are not supported.
    """
    lines = [ln for ln in text.splitlines() if not ln.lstrip().startswith("#")]
    tokens = tokenize(" ".join(lines))
    prefixes: dict[str, str] = {}
    i = 0
    while i < len(tokens) and tokens[i].upper() == "PREFIX":
        if i + 2 >= len(tokens) or not tokens[i + 1].endswith(":"):
            raise ParseError("malformed PREFIX declaration")
        iri = tokens[i + 2]
        if not (iri.startswith("<") and iri.endswith(">")):
            raise ParseError("PREFIX needs a bracketed IRI")
        prefixes[tokens[i + 1][:-1]] = iri[1:-1]
        i += 3
    if i >= len(tokens) or tokens[i].upper() != "SELECT":
        raise ParseError("expected SELECT")
    try:
        open_at = tokens.index("{", i)
    except ValueError:
        raise ParseError("expected '{'") from None
    head = [t.upper() for t in tokens[i + 1:open_at]]
    if head and head[-1] == "WHERE":
        head.pop()
    if head and head[0] == "DISTINCT":
        head.pop(0)
    if not head or not (head == ["*"] or all(t.startswith("?") for t in head)):
        raise ParseError("bad projection")
    if tokens[-1] != "}":
        raise ParseError("expected closing '}'")
    body = tokens[open_at + 1:-1]
    for tok in body:
        keyword = tok.split("(", 1)[0].upper()
        if keyword in ("FILTER", "OPTIONAL", "UNION", "MINUS"):
            raise ParseError(f"{keyword} is not supported")
    patterns: list[TriplePattern] = []
    current: list[str] = []
    for tok in body + ["."]:
        if tok == ".":
            if not current:
                continue
            if len(current) != 3:
                raise ParseError(f"triple pattern needs 3 terms: {' '.join(current)}")
            try:
                tp = TriplePattern(*(parse_term(t, prefixes) for t in current))
            except ValueError as exc:
                raise ParseError(str(exc)) from None
            if isinstance(tp.p, Literal):
                raise ParseError("literal in predicate position")
            if tp not in patterns:
                patterns.append(tp)
            current = []
        elif tok in "{}":
            raise ParseError("nested groups are not supported")
        else:
            current.append(tok)
    if not patterns:
        raise ParseError("empty query")
    return Bgp(tuple(patterns))


def read_query(path) -> Bgp:
    return parse_query(Path(path).read_text(encoding="utf-8"))


def format_query(bgp: Bgp) -> str:
    body = "".join(f"  {tp} .\n" for tp in bgp.patterns)
    return "SELECT * WHERE {\n" + body + "}\n"

