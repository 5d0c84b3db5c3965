"""In-memory triple store answering paged triple-pattern fragments."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, TextIO

from .rdf import Term, Triple, TriplePattern, Variable
from .syntax import read_triples, write_triples

DEFAULT_PAGE_SIZE = 100


def triple_key(t: Triple) -> tuple[str, str, str]:
    return (str(t.s), str(t.p), str(t.o))


@dataclass(frozen=True)
class Fragment:
    triples: tuple[Triple, ...]
    total_count: int
    page: int
    page_size: int

    @property
    def last_page(self) -> int:
        return max(1, -(-self.total_count // self.page_size))


class Store:
    """Immutable set of triples indexed by predicate, (p, s) and (p, o).

    Every index list is kept in the store's lexicographic (s, p, o) order so
    fragments come out deterministically.
    """

    def __init__(self, triples: Iterable[Triple] = ()):
        unique = set(triples)
        self._set = frozenset(unique)
        self._triples: tuple[Triple, ...] = tuple(sorted(unique, key=triple_key))
        by_p = defaultdict(list)
        by_ps = defaultdict(list)
        by_po = defaultdict(list)
        for t in self._triples:
            by_p[t.p].append(t)
            by_ps[t.p, t.s].append(t)
            by_po[t.p, t.o].append(t)
        self._by_p = dict(by_p)
        self._by_ps = dict(by_ps)
        self._by_po = dict(by_po)

    @classmethod
    def load(cls, source) -> Store:
        """Build a store from a triple file path or an iterable of lines."""
        return cls(read_triples(source))

    def write(self, out: TextIO) -> None:
        write_triples(self._triples, out)

    def __len__(self):
        return len(self._triples)

    def __iter__(self):
        return iter(self._triples)

    def __contains__(self, t):
        return t in self._set

    def _candidates(self, tp: TriplePattern) -> Iterable[Triple]:
        s, p, o = tp
        if isinstance(p, Variable):
            return self._triples
        if not isinstance(s, Variable):
            return self._by_ps.get((p, s), ())
        if not isinstance(o, Variable):
            return self._by_po.get((p, o), ())
        return self._by_p.get(p, ())

    def match(self, tp: TriplePattern) -> list[Triple]:
        """All triples matching ``tp`` (repeated variables must agree)."""
        out = []
        for t in self._candidates(tp):
            binding: dict[Variable, Term] = {}
            for x, y in zip(tp, t):
                if isinstance(x, Variable):
                    if binding.setdefault(x, y) != y:
                        break
                elif x != y:
                    break
            else:
                out.append(t)
        return out

    def evaluate_fragment(self, tp: TriplePattern, page: int = 1,
                          page_size: int = DEFAULT_PAGE_SIZE) -> Fragment:
        if page < 1 or page_size < 1:
            raise ValueError("page and page_size must be >= 1")
        matches = self.match(tp)
        start = (page - 1) * page_size
        return Fragment(tuple(matches[start:start + page_size]), len(matches), page, page_size)
