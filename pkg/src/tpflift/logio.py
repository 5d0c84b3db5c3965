"""TPF server logs: one JSON record per line.

    {"ip": "10.0.0.1", "ts": 3, "s": "c1", "p": "p1", "o": "?o", "mu": {"?o": ["a"]}}

``s``/``p``/``o`` and the values in ``mu`` use the compact term syntax of
:mod:`tpflift.rdf`. ``mu`` holds the output mappings of the request.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence, TextIO

from .rdf import RESERVED, IRI, Literal, MappingSet, TriplePattern, Variable, format_term, parse_term


@dataclass(frozen=True, slots=True)
class LogEntry:
    ip: str
    ts: int
    tp: TriplePattern
    outputs: MappingSet

    def with_ts(self, ts: int) -> LogEntry:
        return LogEntry(self.ip, ts, self.tp, self.outputs)


class Reject(NamedTuple):
    lineno: int
    reason: str


class LogFormatError(ValueError):
    pass


def _entry_from_record(rec) -> LogEntry:
    if not isinstance(rec, dict):
        raise LogFormatError("record is not an object")
    missing = [k for k in ("ip", "ts", "s", "p", "o") if k not in rec]
    if missing:
        raise LogFormatError(f"missing field(s): {', '.join(missing)}")
    ip, ts = rec["ip"], rec["ts"]
    if not isinstance(ip, str):
        raise LogFormatError("ip must be a string")
    if not isinstance(ts, int) or isinstance(ts, bool):
        raise LogFormatError("ts must be an integer")
    try:
        terms = [parse_term(rec[k]) if isinstance(rec[k], str) else None for k in "spo"]
    except ValueError as exc:
        raise LogFormatError(str(exc)) from None
    if None in terms:
        raise LogFormatError("terms must be strings")
    tp = TriplePattern(*terms)
    if isinstance(tp.p, Variable):
        raise LogFormatError("unbound predicate")
    if isinstance(tp.p, Literal):
        raise LogFormatError("literal predicate")
    tp_vars = tp.variables()
    if any(v in RESERVED for v in tp_vars):
        raise LogFormatError("reserved variable name")
    mu = rec.get("mu", {})
    if not isinstance(mu, dict):
        raise LogFormatError("mu must be an object")
    outputs = MappingSet()
    for key, values in mu.items():
        try:
            var = parse_term(key)
        except ValueError as exc:
            raise LogFormatError(str(exc)) from None
        if var not in tp_vars:
            raise LogFormatError(f"mu binds {key}, which is not a variable of the pattern")
        if not isinstance(values, list):
            raise LogFormatError("mu values must be a list")
        for text in values:
            try:
                value = parse_term(text) if isinstance(text, str) else None
            except ValueError as exc:
                raise LogFormatError(str(exc)) from None
            if not isinstance(value, (IRI, Literal)):
                raise LogFormatError(f"bad mapping value {text!r}")
            outputs.add(var, value)
    return LogEntry(ip, ts, tp, outputs)


def parse_log(source: Iterable[str]) -> tuple[list[LogEntry], list[Reject]]:
    """Parse a log; malformed or out-of-scope lines become rejects.

    Entries are stably re-sorted by timestamp. Blank lines and ``#`` comments
    are skipped.
    """
    entries = []
    rejects = []
    for lineno, line in enumerate(source, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rec = json.loads(line)
        except (json.JSONDecodeError, RecursionError):
            rejects.append(Reject(lineno, "not a JSON record"))
            continue
        try:
            entries.append(_entry_from_record(rec))
        except (LogFormatError, ValueError) as exc:
            rejects.append(Reject(lineno, str(exc)))
    entries.sort(key=lambda e: e.ts)
    return entries, rejects


def read_log(path) -> tuple[list[LogEntry], list[Reject]]:
    with open(path, encoding="utf-8") as fh:
        return parse_log(fh)


def format_entry(e: LogEntry) -> str:
    rec = {
        "ip": e.ip,
        "ts": e.ts,
        "s": format_term(e.tp.s),
        "p": format_term(e.tp.p),
        "o": format_term(e.tp.o),
        "mu": {format_term(var): [format_term(v) for v in vals] for var, vals in e.outputs.items()},
    }
    return json.dumps(rec, ensure_ascii=False, separators=(", ", ": "))


def write_log(entries: Sequence[LogEntry], out: TextIO) -> None:
    for e in entries:
        out.write(format_entry(e))
        out.write("\n")


def save_log(entries: Sequence[LogEntry], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        write_log(entries, fh)


def log_duration(entries: Sequence[LogEntry]) -> int:
    if not entries:
        return 0
    return max(e.ts for e in entries) - min(e.ts for e in entries)
