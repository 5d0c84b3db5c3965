"""End-to-end lift: ctps, then the dtp graph, then BGPs, per ip and per slice."""

from __future__ import annotations

import gc
import math
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from typing import Sequence, Union

from .bgp import DeducedBgp, VariableNamer, extract_bgps, filter_self_joins
from .ctp import UNBOUNDED, Ctp, ctp_extraction
from .dtp import DtpGraph, nested_loop_detection
from .logio import LogEntry, log_duration
from .metrics import concurrency_resistance, evaluate

# a duration is a number of ticks, math.inf, or a "N%" share of the log duration
Duration = Union[int, float, str]


def parse_duration(text: str) -> Duration:
    text = text.strip()
    if text.lower() in ("inf", "unbounded", "none"):
        return UNBOUNDED
    if text.endswith("%"):
        pct = float(text[:-1])
        if not pct > 0:
            raise ValueError(f"percentage must be > 0: {text!r}")
        return text
    value = float(text)
    return int(value) if value.is_integer() else value


def resolve_duration(value: Duration, duration: int) -> float:
    """Absolute duration; percentages are taken of ``duration``."""
    if isinstance(value, str):
        return float(value.rstrip("%")) * duration / 100
    return value


@dataclass
class LiftConfig:
    gap: Duration = UNBOUNDED
    slice_length: Duration | None = None
    self_join_filter: bool = False
    per_ip: bool = False

    def __post_init__(self):
        if isinstance(self.gap, str):
            self.gap = parse_duration(self.gap)
        if isinstance(self.slice_length, str):
            self.slice_length = parse_duration(self.slice_length)
        if not isinstance(self.gap, str) and not self.gap > 0:
            raise ValueError("gap must be > 0")
        sl = self.slice_length
        if sl is not None and not isinstance(sl, str):
            if not sl > 0:
                raise ValueError("slice length must be > 0")
            if not isinstance(self.gap, str) and sl < self.gap:
                raise ValueError("slice length must be >= gap")

    def resolved(self, log: Sequence[LogEntry]) -> tuple[float, float | None]:
        """(gap, slice length) in ticks for this log."""
        duration = log_duration(log)
        gap = resolve_duration(self.gap, duration)
        sl = None if self.slice_length is None else resolve_duration(self.slice_length, duration)
        if sl is not None and sl < gap:
            raise ValueError(f"slice length {sl} is shorter than gap {gap}")
        if sl is not None and sl <= 0:
            raise ValueError("slice length resolves to 0 ticks")
        return gap, sl


@dataclass
class UnitStats:
    ctps: int
    dtps: int
    edges: int


@dataclass
class Unit:
    """One independently lifted part of the log."""

    ip: str | None
    slice: int | None
    entries: int
    ctps: list[Ctp]
    graph: DtpGraph | None
    bgps: list[DeducedBgp]
    stats: UnitStats | None = None

    def __post_init__(self):
        if self.stats is None:
            self.stats = UnitStats(len(self.ctps), len(self.graph.nodes), len(self.graph.edges))


@dataclass
class LiftResult:
    gap: float
    slice_length: float | None
    units: list[Unit] = field(default_factory=list)

    @property
    def bgps(self) -> list[DeducedBgp]:
        return [b for u in self.units for b in u.bgps]

    def meta(self) -> dict:
        def num(x):
            if x is None:
                return None
            if math.isinf(x):
                return "inf"
            return int(x) if float(x).is_integer() else x

        return {
            "gap": num(self.gap),
            "slice_length": num(self.slice_length),
            "units": len(self.units),
            "entries": sum(u.entries for u in self.units),
            "ctps": sum(u.stats.ctps for u in self.units),
            "dtps": sum(u.stats.dtps for u in self.units),
            "edges": sum(u.stats.edges for u in self.units),
            "bgps": sum(len(u.bgps) for u in self.units),
        }


def _partition(log: Sequence[LogEntry], cfg_per_ip: bool, slice_length: float | None):
    if cfg_per_ip:
        by_ip: dict[str, list[LogEntry]] = {}
        for e in log:
            by_ip.setdefault(e.ip, []).append(e)
        parts = [(ip, entries) for ip, entries in by_ip.items()]
    else:
        parts = [(None, list(log))]
    if slice_length is None or math.isinf(slice_length) or not log:
        return [(ip, None, entries) for ip, entries in parts]
    first = log[0].ts
    out = []
    for ip, entries in parts:
        slices: dict[int, list[LogEntry]] = {}
        for e in entries:
            slices.setdefault(int((e.ts - first) // slice_length), []).append(e)
        out.extend((ip, k, slices[k]) for k in sorted(slices))
    return out


@contextmanager
def paused_gc():
    """Suspend the cycle collector around allocation-heavy phases.

    The pipeline builds millions of small acyclic objects; with the
    collector on, every full pass rescans all of them, which on large logs
    costs more than the lift itself.
    """
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if was_enabled:
            gc.enable()


def run_lift(log: Sequence[LogEntry], cfg: LiftConfig | None = None,
             keep_trace: bool = True) -> LiftResult:
    """Lift a time-ordered log.

    With ``keep_trace`` each unit keeps its ctps and dtp graph (for dumps);
    without it they are dropped as soon as the unit is done.
    """
    cfg = cfg or LiftConfig()
    gap, slice_length = cfg.resolved(log)
    result = LiftResult(gap, slice_length)
    namer = VariableNamer()
    with paused_gc():
        for ip, k, entries in _partition(log, cfg.per_ip, slice_length):
            ctps = ctp_extraction(entries, gap)
            graph = nested_loop_detection(ctps, gap)
            bgps = extract_bgps(graph, namer)
            if cfg.self_join_filter:
                windows = {n.id: (n.ts_min, n.ts_max) for n in graph.nodes}
                bgps = filter_self_joins(bgps, windows)
            if keep_trace:
                result.units.append(Unit(ip, k, len(entries), ctps, graph, bgps))
            else:
                stats = UnitStats(len(ctps), len(graph.nodes), len(graph.edges))
                result.units.append(Unit(ip, k, len(entries), [], None, bgps, stats))
    return result


def lift(log: Sequence[LogEntry], cfg: LiftConfig | None = None) -> list[DeducedBgp]:
    return run_lift(log, cfg, keep_trace=False).bgps


def sweep(log: Sequence[LogEntry], configs, truth=(), isolated=()):
    """Lift ``log`` once per (label, config) and score each run.

    The reference is the truth BGPs, or, when ``isolated`` logs are given,
    the union of their lifts with the same absolute gap and slice length
    (percentages are resolved against ``log``).
    """
    rows = []
    for label, cfg in configs:
        gap, slice_length = cfg.resolved(log)
        fixed = replace(cfg, gap=gap, slice_length=slice_length)
        deduced = lift(log, fixed)
        if isolated:
            rows.append((label, concurrency_resistance([lift(lg, fixed) for lg in isolated], deduced)))
        else:
            rows.append((label, evaluate(deduced, truth)))
    return rows
