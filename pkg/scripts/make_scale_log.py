#!/usr/bin/env python3
"""Write a large shuffled log for the scale smoke test.

    python3 scripts/make_scale_log.py OUT [--entries 1000000] [--queries 100] [--seed 7]

Each of the random queries is executed once against a shared store; the
resulting logs are replayed under fresh ips with random start offsets until
the entry count is reached, then merged by time.
"""

import argparse
import sys

from tpflift.logio import log_duration, save_log
from tpflift.workload import disjoint_worlds, isolated_logs, repeat_executions


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out")
    ap.add_argument("--entries", type=int, default=1_000_000)
    ap.add_argument("--queries", type=int, default=100)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args(argv)
    store, queries = disjoint_worlds(args.seed, count=args.queries)
    log = repeat_executions(isolated_logs(store, queries), args.entries, seed=args.seed)
    save_log(log, args.out)
    print(f"{len(log)} entries, {len({e.ip for e in log})} ips, duration {log_duration(log)}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
