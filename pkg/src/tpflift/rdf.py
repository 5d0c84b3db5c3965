"""RDF vocabulary shared by every stage: terms, triple patterns, BGPs and mapping sets.

Terms have a compact text syntax used by all file formats:

    <http://ex.org/a>   IRI (angle brackets optional when the IRI is a plain token)
    "Brad Pitt"@en      literal with optional language tag
    ?movie              variable
"""

from __future__ import annotations

import json
import re
import weakref
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from itertools import combinations
from typing import Iterable, Iterator, Mapping, Sequence, Union

SUBJECT = "subject"
OBJECT = "object"

_BARE_IRI = re.compile(r'[^\s<>"?#@{}.][^\s<>"{}]*')
_IRI_CHARS = re.compile(r'[^\s<>"]+')
_VAR_NAME = re.compile(r"\w+")
_LANG = re.compile(r"[A-Za-z]+(?:-[A-Za-z0-9]+)*")


class _Term:
    """Immutable, interned term.

    Each distinct term exists once (per process while referenced), so
    equality and hashing are identity-based and run at C speed; the terms
    are the keys of every hot dict in the pipeline.
    """

    __slots__ = ("__weakref__",)

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    __delattr__ = __setattr__

    def __copy__(self):
        return self

    def __deepcopy__(self, memo):
        return self

    def __str__(self):
        return format_term(self)


def _intern(cls, key, validate, **fields):
    pool = cls._pool
    term = pool.get(key)
    if term is None:
        validate()
        term = object.__new__(cls)
        for name, value in fields.items():
            object.__setattr__(term, name, value)
        pool[key] = term
    return term


class IRI(_Term):
    __slots__ = ("value",)
    _pool: weakref.WeakValueDictionary = weakref.WeakValueDictionary()

    def __new__(cls, value: str):
        def check():
            if not isinstance(value, str) or not _IRI_CHARS.fullmatch(value):
                raise ValueError(f"invalid IRI: {value!r}")

        return _intern(cls, value, check, value=value)

    def __reduce__(self):
        return IRI, (self.value,)

    def __repr__(self):
        return f"IRI({self.value!r})"


class Literal(_Term):
    __slots__ = ("lexical", "lang")
    _pool: weakref.WeakValueDictionary = weakref.WeakValueDictionary()

    def __new__(cls, lexical: str, lang: str | None = None):
        def check():
            if not isinstance(lexical, str):
                raise ValueError(f"invalid literal: {lexical!r}")
            if lang is not None and not (isinstance(lang, str) and _LANG.fullmatch(lang)):
                raise ValueError(f"invalid language tag: {lang!r}")

        return _intern(cls, (lexical, lang), check, lexical=lexical, lang=lang)

    def __reduce__(self):
        return Literal, (self.lexical, self.lang)

    def __repr__(self):
        return f"Literal({self.lexical!r}, {self.lang!r})"


class Variable(_Term):
    __slots__ = ("name",)
    _pool: weakref.WeakValueDictionary = weakref.WeakValueDictionary()

    def __new__(cls, name: str):
        def check():
            if not isinstance(name, str) or not _VAR_NAME.fullmatch(name):
                raise ValueError(f"invalid variable name: {name!r}")

        return _intern(cls, name, check, name=name)

    def __reduce__(self):
        return Variable, (self.name,)

    def __repr__(self):
        return f"Variable({self.name!r})"

    def __str__(self):
        return "?" + self.name


Term = Union[IRI, Literal, Variable]
Value = Union[IRI, Literal]

# Placeholders for constants found in subject / object position of a request.
SUBJECT_IN = Variable("_inS")
OBJECT_IN = Variable("_inO")
RESERVED = (SUBJECT_IN, OBJECT_IN)

_DISPLAY = {SUBJECT_IN: "?σ", OBJECT_IN: "?ω"}


def format_term(term: Term) -> str:
    if isinstance(term, Variable):
        return "?" + term.name
    if isinstance(term, Literal):
        text = json.dumps(term.lexical, ensure_ascii=False)
        return f"{text}@{term.lang}" if term.lang else text
    if _BARE_IRI.fullmatch(term.value) and not term.value.endswith("."):
        return term.value
    return f"<{term.value}>"


def display_term(term: Term) -> str:
    """Like format_term, but shows the reserved placeholders as ?σ / ?ω."""
    return _DISPLAY.get(term) or format_term(term)


_decoder = json.JSONDecoder()


def parse_term(text: str, prefixes: Mapping[str, str] | None = None) -> Term:
    """Parse one term written in the compact syntax.

    Bare tokens are IRIs; ``pfx:local`` is expanded when ``pfx`` is declared
    in ``prefixes``.
    """
    if prefixes:
        return _parse_term(text, prefixes)
    return _parse_plain(text)


@lru_cache(maxsize=1 << 16)
def _parse_plain(text: str) -> Term:
    # logs repeat the same few thousand terms millions of times
    return _parse_term(text, None)


def _parse_term(text: str, prefixes: Mapping[str, str] | None) -> Term:
    if not text:
        raise ValueError("empty term")
    head = text[0]
    if head == "?":
        return Variable(text[1:])
    if head == "<":
        if not text.endswith(">"):
            raise ValueError(f"unterminated IRI: {text!r}")
        return IRI(text[1:-1])
    if head == '"':
        try:
            lexical, end = _decoder.raw_decode(text)
        except json.JSONDecodeError as exc:
            raise ValueError(f"bad literal: {text!r}") from exc
        if not isinstance(lexical, str):
            raise ValueError(f"bad literal: {text!r}")
        rest = text[end:]
        if not rest:
            return Literal(lexical)
        if rest[0] != "@":
            raise ValueError(f"trailing characters after literal: {text!r}")
        return Literal(lexical, rest[1:])
    if prefixes and ":" in text:
        pfx, local = text.split(":", 1)
        if pfx in prefixes:
            return IRI(prefixes[pfx] + local)
    if head in "@#{}.":
        raise ValueError(f"unexpected token: {text!r}")
    return IRI(text)


@dataclass(frozen=True, slots=True)
class TriplePattern:
    s: Term
    p: Term
    o: Term

    def __iter__(self) -> Iterator[Term]:
        yield self.s
        yield self.p
        yield self.o

    def __str__(self):
        return f"{format_term(self.s)} {format_term(self.p)} {format_term(self.o)}"

    def variables(self) -> list[Variable]:
        seen = []
        for t in (self.s, self.p, self.o):
            if t.__class__ is Variable and t not in seen:
                seen.append(t)
        return seen

    def positions_of(self, var: Variable) -> list[str]:
        """Subject/object positions holding ``var``."""
        out = []
        if self.s == var:
            out.append(SUBJECT)
        if self.o == var:
            out.append(OBJECT)
        return out

    @property
    def is_ground(self) -> bool:
        return not any(isinstance(t, Variable) for t in self)


class Triple(TriplePattern):
    """A ground triple: IRI subject and predicate, IRI or literal object."""

    __slots__ = ()

    def __init__(self, s: IRI, p: IRI, o: Value):
        if not isinstance(s, IRI) or not isinstance(p, IRI):
            raise ValueError("triple subject and predicate must be IRIs")
        if not isinstance(o, (IRI, Literal)):
            raise ValueError("triple object must be an IRI or a literal")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "o", o)


def template_of(tp: TriplePattern) -> tuple[TriplePattern, dict[Variable, Value]]:
    """Replace the bound subject/object of a request by the reserved variables.

    Returns the template and the replaced constants keyed by reserved variable.
    Raises ValueError for an unbound predicate, which is out of scope.
    """
    if isinstance(tp.p, Variable):
        raise ValueError("unbound predicate")
    seeds: dict[Variable, Value] = {}
    s, o = tp.s, tp.o
    if not isinstance(s, Variable):
        seeds[SUBJECT_IN] = s
        s = SUBJECT_IN
    if not isinstance(o, Variable):
        seeds[OBJECT_IN] = o
        o = OBJECT_IN
    if not seeds:
        return tp, seeds
    return TriplePattern(s, tp.p, o), seeds


class MappingSet:
    """Variable -> ordered, duplicate-free set of values.

    Insertion order is kept so serialized output is reproducible; equality
    ignores it.
    """

    __slots__ = ("_b",)

    def __init__(self, bindings: Mapping[Variable, Iterable[Value]] | None = None):
        self._b: dict[Variable, dict[Value, None]] = {}
        if bindings:
            for var, values in bindings.items():
                for v in values:
                    self.add(var, v)

    def add(self, var: Variable, value: Value) -> None:
        vals = self._b.get(var)
        if vals is None:
            self._b[var] = {value: None}
        else:
            vals[value] = None

    def update(self, other: MappingSet) -> None:
        for var, vals in other._b.items():
            mine = self._b.get(var)
            if mine is None:
                self._b[var] = dict(vals)
            else:
                mine.update(vals)

    def get(self, var: Variable):
        """Values bound to ``var`` (a set-like keys view), or an empty tuple."""
        vals = self._b.get(var)
        return vals.keys() if vals is not None else ()

    def variables(self) -> list[Variable]:
        return list(self._b)

    def items(self):
        """(variable, set-like view of its values) pairs."""
        return ((var, vals.keys()) for var, vals in self._b.items())

    def copy(self) -> MappingSet:
        out = MappingSet()
        out._b = {var: dict(vals) for var, vals in self._b.items()}
        return out

    def __contains__(self, var) -> bool:
        return var in self._b

    def __len__(self):
        return len(self._b)

    def __bool__(self):
        return bool(self._b)

    def __eq__(self, other):
        if not isinstance(other, MappingSet):
            return NotImplemented
        if self._b.keys() != other._b.keys():
            return False
        return all(vals.keys() == other._b[var].keys() for var, vals in self._b.items())

    def __repr__(self):
        body = ", ".join(
            f"{display_term(var)}: {{{', '.join(map(format_term, vals))}}}"
            for var, vals in self._b.items()
        )
        return f"MappingSet({body})"


@dataclass(frozen=True, slots=True)
class JoinEdge:
    a: int
    pos_a: str
    b: int
    pos_b: str

    def kind(self) -> str:
        """subject-subject, subject-object or object-object."""
        first, second = sorted((self.pos_a, self.pos_b), key=(SUBJECT, OBJECT).index)
        return f"{first}-{second}"


@dataclass(frozen=True)
class Bgp:
    """A basic graph pattern.

    ``joins`` is derived from the patterns: every pair of subject/object
    positions in two different patterns holding the same variable.
    """

    patterns: tuple[TriplePattern, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "patterns", tuple(self.patterns))

    @cached_property
    def joins(self) -> frozenset[JoinEdge]:
        return frozenset(join_edges(self.patterns))

    def variables(self) -> list[Variable]:
        seen: dict[Variable, None] = {}
        for tp in self.patterns:
            for v in tp.variables():
                seen[v] = None
        return list(seen)

    def __len__(self):
        return len(self.patterns)

    def __str__(self):
        return "{" + " . ".join(map(str, self.patterns)) + "}"


def join_edges(patterns: Sequence[TriplePattern]) -> list[JoinEdge]:
    occurrences: dict[Variable, list[tuple[int, str]]] = {}
    for i, tp in enumerate(patterns):
        for pos, term in ((SUBJECT, tp.s), (OBJECT, tp.o)):
            if isinstance(term, Variable):
                occurrences.setdefault(term, []).append((i, pos))
    edges = []
    for occ in occurrences.values():
        for (i, pi), (j, pj) in combinations(occ, 2):
            if i != j:
                edges.append(JoinEdge(i, pi, j, pj))
    return edges


# -- matching under variable renaming ------------------------------------------


def _unify(a: TriplePattern, b: TriplePattern, ren: dict, used: set):
    """Extend the injective renaming a-vars -> b-vars so that a maps onto b.

    Returns the list of newly bound variables, or None if impossible.
    """
    added = []
    for x, y in zip(a, b):
        if isinstance(x, Variable):
            if not isinstance(y, Variable):
                break
            bound = ren.get(x)
            if bound is None:
                if y in used:
                    break
                ren[x] = y
                used.add(y)
                added.append(x)
            elif bound != y:
                break
        elif x != y:
            break
    else:
        return added
    for x in added:
        used.discard(ren.pop(x))
    return None


def best_match(a: Sequence[TriplePattern], b: Sequence[TriplePattern]):
    """Largest consistent matching of the patterns of ``a`` onto ``b``.

    Exhaustive search over injective variable renamings. The score is
    (matched patterns, matched joins); returns ``(score, pairing)`` where
    pairing maps indices of ``a`` to indices of ``b``.
    """
    a_joins = join_edges(a)
    b_joins = {(e.a, e.pos_a, e.b, e.pos_b) for e in join_edges(b)}
    b_joins |= {(e.b, e.pos_b, e.a, e.pos_a) for e in join_edges(b)}

    def compatible(x: TriplePattern, y: TriplePattern) -> bool:
        return all(
            isinstance(s, Variable) and isinstance(t, Variable) or s == t
            for s, t in zip(x, y)
        )

    candidates = [[j for j, y in enumerate(b) if compatible(x, y)] for x in a]
    order = sorted(range(len(a)), key=lambda i: len(candidates[i]))
    order = [i for i in order if candidates[i]]
    limit = min(len(order), len(b))

    best = [(-1, -1), {}]
    pairing: dict[int, int] = {}
    ren: dict = {}
    used_vars: set = set()
    used_b: set = set()

    def joins_matched() -> int:
        return sum(
            1
            for e in a_joins
            if e.a in pairing
            and e.b in pairing
            and (pairing[e.a], e.pos_a, pairing[e.b], e.pos_b) in b_joins
        )

    def search(k: int) -> bool:
        if len(pairing) + (len(order) - k) < best[0][0]:
            return False
        if k == len(order) or len(pairing) == limit:
            score = (len(pairing), joins_matched())
            if score > best[0]:
                best[0], best[1] = score, dict(pairing)
            return score == (limit, len(a_joins))
        i = order[k]
        for j in candidates[i]:
            if j in used_b:
                continue
            added = _unify(a[i], b[j], ren, used_vars)
            if added is None:
                continue
            pairing[i] = j
            used_b.add(j)
            done = search(k + 1)
            del pairing[i]
            used_b.discard(j)
            for x in added:
                used_vars.discard(ren.pop(x))
            if done:
                return True
        return search(k + 1)

    search(0)
    score = best[0] if best[0][0] >= 0 else (0, 0)
    return score, best[1]


def patterns_equal_up_to_renaming(a: Bgp, b: Bgp) -> bool:
    if len(a.patterns) != len(b.patterns) or len(a.joins) != len(b.joins):
        return False
    (matched, joins), _ = best_match(a.patterns, b.patterns)
    return matched == len(a.patterns) and joins == len(a.joins)
