"""Precision / recall of deduced BGPs against ground-truth queries.

Each truth BGP is paired with at most one deduced BGP. A pair scores the
number of triple patterns (then joins) matched under one consistent,
injective variable renaming; pairs are chosen by a maximum-weight
assignment over the truth x deduced score matrix. Totals are pooled over
all patterns and joins (micro-average); the per-query macro-average is
reported alongside.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

import numpy as np
from scipy.optimize import linear_sum_assignment

from .bgp import DeducedBgp
from .rdf import Bgp, best_match, patterns_equal_up_to_renaming

ONE = Fraction(1)


def ratio(num: int, den: int) -> Fraction:
    """num/den, with the empty case (nothing to get wrong) counting as perfect."""
    return Fraction(num, den) if den else ONE


@dataclass
class QueryScore:
    truth: int
    deduced: int | None
    matched_patterns: int
    truth_patterns: int
    deduced_patterns: int
    matched_joins: int
    truth_joins: int
    deduced_joins: int

    @property
    def tp_precision(self) -> Fraction:
        if self.deduced is None:
            return Fraction(0)
        return ratio(self.matched_patterns, self.deduced_patterns)

    @property
    def tp_recall(self) -> Fraction:
        return ratio(self.matched_patterns, self.truth_patterns)

    @property
    def join_precision(self) -> Fraction:
        if self.deduced is None:
            return Fraction(0)
        return ratio(self.matched_joins, self.deduced_joins)

    @property
    def join_recall(self) -> Fraction:
        return ratio(self.matched_joins, self.truth_joins)


@dataclass
class EvalReport:
    tp_precision: Fraction
    tp_recall: Fraction
    join_precision: Fraction
    join_recall: Fraction
    per_query: list[QueryScore] = field(default_factory=list)
    unmatched_deduced: list[int] = field(default_factory=list)

    @property
    def tp_quality(self) -> Fraction:
        return (self.tp_precision + self.tp_recall) / 2

    @property
    def join_quality(self) -> Fraction:
        return (self.join_precision + self.join_recall) / 2

    @property
    def quality(self) -> Fraction:
        return (self.tp_quality + self.join_quality) / 2

    def macro(self) -> dict[str, Fraction]:
        """Per-truth-query averages."""
        n = len(self.per_query)
        if not n:
            return {k: ONE for k in ("tp_precision", "tp_recall", "join_precision", "join_recall")}
        return {
            k: sum((getattr(q, k) for q in self.per_query), Fraction(0)) / n
            for k in ("tp_precision", "tp_recall", "join_precision", "join_recall")
        }

    def metrics(self) -> dict[str, Fraction]:
        return {
            "tp_precision": self.tp_precision,
            "tp_recall": self.tp_recall,
            "tp_quality": self.tp_quality,
            "join_precision": self.join_precision,
            "join_recall": self.join_recall,
            "join_quality": self.join_quality,
            "quality": self.quality,
        }

    def all_ones(self) -> bool:
        return all(v == 1 for v in self.metrics().values())

    def to_dict(self) -> dict:
        macro = self.macro()
        macro["tp_quality"] = (macro["tp_precision"] + macro["tp_recall"]) / 2
        macro["join_quality"] = (macro["join_precision"] + macro["join_recall"]) / 2
        macro["quality"] = (macro["tp_quality"] + macro["join_quality"]) / 2
        return {
            "micro": {k: float(v) for k, v in self.metrics().items()},
            "macro": {k: float(v) for k, v in macro.items()},
            "per_query": [
                {
                    "truth": q.truth,
                    "deduced": q.deduced,
                    "patterns": [q.matched_patterns, q.truth_patterns, q.deduced_patterns],
                    "joins": [q.matched_joins, q.truth_joins, q.deduced_joins],
                }
                for q in self.per_query
            ],
            "unmatched_deduced": list(self.unmatched_deduced),
        }

    def format_table(self) -> str:
        rows = [("metric", "micro", "macro")]
        macro = self.to_dict()["macro"]
        for k, v in self.metrics().items():
            rows.append((k, f"{float(v):.4f}", f"{macro[k]:.4f}"))
        width = max(len(r[0]) for r in rows)
        lines = [f"{a:<{width}}  {b:>8}  {c:>8}" for a, b, c in rows]
        lines.append(f"{'noise bgps':<{width}}  {len(self.unmatched_deduced):>8}")
        return "\n".join(lines) + "\n"


BgpLike = Union[Bgp, DeducedBgp]


def _as_bgp(x: BgpLike) -> Bgp:
    return x.bgp if isinstance(x, DeducedBgp) else x


def unique_bgps(bgps: Sequence[Bgp]) -> list[Bgp]:
    """Drop BGPs equal up to renaming to an earlier one."""
    out: list[Bgp] = []
    for b in bgps:
        if not any(patterns_equal_up_to_renaming(b, u) for u in out):
            out.append(b)
    return out


def _pair_score(truth: Bgp, deduced: Bgp) -> tuple[int, int, int]:
    """(matched patterns, matched truth joins, matched deduced joins)."""
    (matched, joins), pairing = best_match(truth.patterns, deduced.patterns)
    truth_pairs = {(pairing[e.a], e.pos_a, pairing[e.b], e.pos_b)
                   for e in truth.joins if e.a in pairing and e.b in pairing}
    truth_pairs |= {(b, pb, a, pa) for a, pa, b, pb in truth_pairs}
    ded_joins = sum(1 for e in deduced.joins if (e.a, e.pos_a, e.b, e.pos_b) in truth_pairs)
    return matched, joins, ded_joins


def evaluate(deduced: Sequence[BgpLike], truth: Sequence[BgpLike],
             collapse_duplicates: bool = True) -> EvalReport:
    ded = [_as_bgp(d) for d in deduced]
    tru = [_as_bgp(t) for t in truth]
    if collapse_duplicates:
        tru = unique_bgps(tru)

    scores = {}
    weight = np.zeros((len(tru), len(ded)))
    # bounds the summed joins, so totals compare patterns first, then joins
    max_joins = sum(len(t.joins) for t in tru)
    scale = len(tru) * (len(ded) + 1) + 1
    for i, t in enumerate(tru):
        preds = {tp.p for tp in t.patterns}
        for j, d in enumerate(ded):
            if not any(tp.p in preds for tp in d.patterns):
                continue
            s = _pair_score(t, d)
            if s[0] == 0:
                continue
            scores[i, j] = s
            primary = s[0] * (max_joins + 1) + s[1]
            weight[i, j] = primary * scale + (len(ded) - j)

    pairs: dict[int, int] = {}
    if scores:
        rows, cols = linear_sum_assignment(weight, maximize=True)
        pairs = {int(i): int(j) for i, j in zip(rows, cols) if (i, j) in scores}

    per_query = []
    for i, t in enumerate(tru):
        j = pairs.get(i)
        if j is None:
            per_query.append(QueryScore(i, None, 0, len(t.patterns), 0, 0, len(t.joins), 0))
            continue
        m, tj, dj = scores[i, j]
        assert tj == dj, "a consistent renaming matches joins one to one"
        per_query.append(QueryScore(i, j, m, len(t.patterns), len(ded[j].patterns),
                                    tj, len(t.joins), len(ded[j].joins)))

    used = set(pairs.values())
    return EvalReport(
        tp_precision=ratio(sum(q.matched_patterns for q in per_query), sum(len(d.patterns) for d in ded)),
        tp_recall=ratio(sum(q.matched_patterns for q in per_query), sum(len(t.patterns) for t in tru)),
        join_precision=ratio(sum(q.matched_joins for q in per_query), sum(len(d.joins) for d in ded)),
        join_recall=ratio(sum(q.matched_joins for q in per_query), sum(len(t.joins) for t in tru)),
        per_query=per_query,
        unmatched_deduced=[j for j in range(len(ded)) if j not in used],
    )


def concurrency_resistance(isolated: Sequence[Sequence[BgpLike]],
                           concurrent: Sequence[BgpLike]) -> EvalReport:
    """Score the concurrent run against the union of the isolated runs."""
    union = [b for run in isolated for b in run]
    return evaluate(concurrent, union)


def format_sweep(rows: Sequence[tuple[str, EvalReport]]) -> str:
    header = ("gap", "tpP", "tpR", "joinP", "joinR", "quality")
    lines = ["  ".join(f"{h:>8}" for h in header)]
    for label, r in rows:
        vals = [r.tp_precision, r.tp_recall, r.join_precision, r.join_recall, r.quality]
        lines.append("  ".join([f"{label:>8}"] + [f"{float(v):8.4f}" for v in vals]))
    return "\n".join(lines) + "\n"
