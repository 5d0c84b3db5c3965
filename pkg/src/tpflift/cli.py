"""Command-line interface: generate, shuffle, lift, eval, sweep, stats.

Exit codes: 0 success, 1 bad input or flags, 2 I/O failure.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import sys
from typing import Sequence

from . import __version__
from .bgp import bgp_stats, dumps_document, format_stats, loads_document, to_document
from .client import OFFSET, RANDOM, ROUND_ROBIN, ClientConfig, ShufflePolicy, execute_query, shuffle_logs
from .ctp import format_ctps
from .logio import LogEntry, parse_log, write_log
from .metrics import evaluate, format_sweep
from .pipeline import LiftConfig, parse_duration, paused_gc, run_lift, sweep
from .store import DEFAULT_PAGE_SIZE, Store
from .syntax import read_query

class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _duration(text: str):
    try:
        return parse_duration(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a duration: {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for every random choice")
    common.add_argument("--out", "-o", help="output file (default: stdout)")

    lifting = argparse.ArgumentParser(add_help=False)
    lifting.add_argument("--slice", type=_duration, default=None,
                         help="process the log in consecutive slices of this length (ticks or N%%)")
    lifting.add_argument("--filter-self-joins", action="store_true",
                         help="drop BGPs made only of self-joins")
    lifting.add_argument("--per-ip", action="store_true", help="lift each client ip separately")

    p = _Parser(prog="tpflift", description="Reconstruct BGPs from TPF server logs.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", parents=[common], help="simulate a TPF client and write its log")
    g.add_argument("store", help="triples file")
    g.add_argument("queries", nargs="+", help="query files, run one after the other")
    g.add_argument("--ip", default="127.0.0.1")
    g.add_argument("--distinct-ips", action="store_true",
                   help="give query k the ip 10.0.0.k instead of --ip")
    g.add_argument("--probe-first", action="store_true",
                   help="request page 1 of every pattern before choosing the join order")
    g.add_argument("--page-size", type=int, default=DEFAULT_PAGE_SIZE)
    g.add_argument("--start", type=int, default=1, help="first timestamp")
    g.add_argument("--step", type=int, default=1, help="clock increment per request")

    s = sub.add_parser("shuffle", parents=[common], help="interleave several logs")
    s.add_argument("logs", nargs="+")
    s.add_argument("--mode", choices=(ROUND_ROBIN, RANDOM, OFFSET), default=RANDOM)
    s.add_argument("--delays", type=_int_list, default=None,
                   help="per-log start delays for --mode offset, e.g. 0,30,45")
    s.add_argument("--start", type=int, default=1, help="first output timestamp")

    li = sub.add_parser("lift", parents=[common, lifting], help="extract BGPs from a log")
    li.add_argument("log", help="log file, or - for stdin")
    li.add_argument("--gap", type=_duration, default=parse_duration("inf"),
                    help="max time between related requests (ticks, N%% of the log duration, or inf)")
    li.add_argument("--format", choices=("canonical", "xml"), default="canonical")
    li.add_argument("--dump-ctps", action="store_true", help="print the ctp table to stderr")
    li.add_argument("--dump-dtps", action="store_true", help="print the dtp graph to stderr")

    e = sub.add_parser("eval", parents=[common], help="score a BGP document against truth queries")
    e.add_argument("document")
    e.add_argument("queries", nargs="+")
    e.add_argument("--format", choices=("table", "canonical"), default="table")

    sw = sub.add_parser("sweep", parents=[common, lifting], help="lift at several gaps and score each")
    sw.add_argument("log")
    sw.add_argument("queries", nargs="*", help="truth query files")
    sw.add_argument("--isolated", nargs="+", metavar="LOG",
                    help="score against the lifts of these isolated logs at the same gap, "
                         "instead of against truth queries")
    sw.add_argument("--gaps", default="1%,10%,50%,100%", help="comma-separated gap list")

    st = sub.add_parser("stats", parents=[common], help="join types and predicate counts")
    st.add_argument("document")
    st.add_argument("--format", choices=("table", "canonical"), default="table")
    return p


# -- helpers -----------------------------------------------------------------------


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load_log(path: str) -> list[LogEntry]:
    if path == "-":
        entries, rejects = parse_log(sys.stdin)
    else:
        with open(path, encoding="utf-8") as fh:
            entries, rejects = parse_log(fh)
    for r in rejects:
        print(f"{path}:{r.lineno}: skipped: {r.reason}", file=sys.stderr)
    return entries


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(text)


def _render_log(entries: Sequence[LogEntry]) -> str:
    buf = io.StringIO()
    write_log(entries, buf)
    return buf.getvalue()


def _lift_config(args, gap) -> LiftConfig:
    return LiftConfig(gap=gap, slice_length=args.slice,
                      self_join_filter=args.filter_self_joins, per_ip=args.per_ip)


# -- commands ----------------------------------------------------------------------


def cmd_generate(args) -> str:
    if args.page_size < 1:
        raise ValueError("--page-size must be >= 1")
    store = Store.load(args.store)
    queries = [read_query(q) for q in args.queries]
    entries: list[LogEntry] = []
    ts = args.start
    for k, q in enumerate(queries, 1):
        ip = f"10.0.0.{k}" if args.distinct_ips else args.ip
        cfg = ClientConfig(ip=ip, probe_first=args.probe_first, page_size=args.page_size,
                           start=ts, step=args.step)
        _, lg = execute_query(store, q, cfg)
        entries.extend(lg)
        if lg:
            ts = lg[-1].ts + args.step
    return _render_log(entries)


def cmd_shuffle(args) -> str:
    logs = [_load_log(p) for p in args.logs]
    delays = args.delays
    if args.mode == OFFSET and delays is None:
        raise ValueError("--mode offset needs --delays")
    policy = ShufflePolicy(mode=args.mode, seed=args.seed, delays=delays or (), start=args.start)
    return _render_log(shuffle_logs(logs, policy))


def cmd_lift(args) -> str:
    entries = _load_log(args.log)
    result = run_lift(entries, _lift_config(args, args.gap),
                      keep_trace=args.dump_ctps or args.dump_dtps)
    if args.dump_ctps:
        for u in result.units:
            sys.stderr.write(format_ctps(u.ctps))
    if args.dump_dtps:
        for u in result.units:
            sys.stderr.write(u.graph.describe())
    meta = {"input": args.log, **result.meta(), "self_join_filter": args.filter_self_joins,
            "per_ip": args.per_ip}
    return dumps_document(to_document(result.bgps, meta), args.format)


def cmd_eval(args) -> str:
    _, deduced = loads_document(_read_text(args.document))
    truth = [read_query(q) for q in args.queries]
    report = evaluate(deduced, truth)
    if args.format == "canonical":
        return json.dumps(report.to_dict(), indent=2) + "\n"
    return report.format_table()


def cmd_sweep(args) -> str:
    if bool(args.queries) == bool(args.isolated):
        raise ValueError("give either truth queries or --isolated logs")
    entries = _load_log(args.log)
    truth = [read_query(q) for q in args.queries]
    isolated = [_load_log(p) for p in args.isolated or ()]
    gaps = [g.strip() for g in args.gaps.split(",") if g.strip()]
    if not gaps:
        raise ValueError("empty --gaps list")
    configs = [(g, _lift_config(args, parse_duration(g))) for g in gaps]
    return format_sweep(sweep(entries, configs, truth, isolated))


def cmd_stats(args) -> str:
    _, bgps = loads_document(_read_text(args.document))
    report = bgp_stats(bgps)
    if args.format == "canonical":
        return json.dumps(report, indent=2, ensure_ascii=False) + "\n"
    return format_stats(report)


COMMANDS = {
    "generate": cmd_generate,
    "shuffle": cmd_shuffle,
    "lift": cmd_lift,
    "eval": cmd_eval,
    "sweep": cmd_sweep,
    "stats": cmd_stats,
}


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        # one-shot process building large acyclic structures: skip cycle collection
        with paused_gc():
            text = COMMANDS[args.command](args)
            _emit(text, args.out)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"tpflift: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"tpflift: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
