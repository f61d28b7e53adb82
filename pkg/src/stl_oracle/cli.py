"""``stl`` command line: build, query, update, bench, verify, gen-workload.

Exit codes: 0 success, 1 verification failure, 2 usage or input error.
Stats are printed one record per line as ``key=value`` pairs.
"""
from __future__ import annotations

import argparse
import logging
import random
import sys
import time
from pathlib import Path
from typing import Sequence, TextIO

import numpy as np

from .graph import INF, DimacsError, Graph, UpdateEvent, UpdateKind, apply_update, iter_updates, parse_queries, read_dimacs
from .index import IndexFormatError, STLIndex, is_index_file
from .label_search import ls_decrease, ls_increase
from .labelling import default_threads, query
from .pareto import pareto_decrease, pareto_increase
from .stats import UpdateStats
from .verify import dump_counterexample, verify_dynamic, verify_hierarchy_mode, verify_static
from .workload import gen_workload, write_workload

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class InputError(Exception):
    """Bad user input; reported on stderr with exit code 2."""


def _fmt_dist(d: int) -> str:
    return "inf" if d >= INF else str(d)


def _kv(**items) -> str:
    return " ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}" for k, v in items.items())


def _load_graph(path: str) -> Graph:
    if is_index_file(path):
        return STLIndex.load(path).graph
    return read_dimacs(path)


def _latency_summary(ns: list[int]) -> str:
    if not ns:
        return _kv(record="query_timing", count=0)
    a = np.asarray(ns, dtype=np.float64) / 1000.0
    return _kv(
        record="query_timing", count=len(ns), mean_us=float(a.mean()),
        p50_us=float(np.percentile(a, 50)), p90_us=float(np.percentile(a, 90)),
        p99_us=float(np.percentile(a, 99)), max_us=float(a.max()), timing="steady_state_excl_load",
    )


def _time_queries(ix: STLIndex, pairs: Sequence[tuple[int, int]]) -> tuple[list[int], list[int]]:
    lab, h = ix.labelling, ix.hierarchy
    clock = time.perf_counter_ns
    dists, ns = [], []
    for s, t in pairs:
        t0 = clock()
        d = query(lab, h, s, t)
        ns.append(clock() - t0)
        dists.append(d)
    return dists, ns


# ---------------------------------------------------------------- commands

def cmd_build(args, out: TextIO) -> int:
    g = read_dimacs(args.graph)
    threads = args.threads or default_threads()
    ix = STLIndex.build(g, args.beta, args.leaf_threshold, args.partition_seed, args.partition_restarts, threads)
    target = args.out or str(Path(args.graph).with_suffix(".stl"))
    ix.save(target)
    print(_kv(record="build", out=target, beta=args.beta, leaf_threshold=args.leaf_threshold,
              threads=threads, **ix.summary()), file=out)
    return EXIT_OK


def cmd_query(args, out: TextIO) -> int:
    ix = STLIndex.load(args.index)
    n = ix.graph.n
    errors = 0
    pairs: list[tuple[int, int]] = []
    if args.random is not None:
        rng = random.Random(args.seed)
        pairs = [(rng.randrange(n), rng.randrange(n)) for _ in range(args.random)]
    else:
        if args.queries is None:
            raise InputError("give a query file or --random N")
        with open(args.queries) as fh:
            for lineno, s, t in parse_queries(fh):
                if not (1 <= s <= n and 1 <= t <= n):
                    print(f"{args.queries}:{lineno}: vertex id out of [1, {n}]", file=sys.stderr)
                    errors += 1
                    continue
                pairs.append((s - 1, t - 1))
    dists, ns = _time_queries(ix, pairs)
    if not args.quiet:
        dest = open(args.out, "w") if args.out else out
        try:
            for (s, t), d in zip(pairs, dists):
                dest.write(f"{s + 1} {t + 1} {_fmt_dist(d)}\n")
        finally:
            if args.out:
                dest.close()
    print(_latency_summary(ns), file=sys.stderr if not args.quiet and not args.out else out)
    return EXIT_USAGE if errors else EXIT_OK


def _read_updates(path: str, graph: Graph) -> list[UpdateEvent]:
    events = []
    with open(path) as fh:
        for lineno, ev in iter_updates(fh, graph.n):
            if not graph.has_edge(ev.u, ev.v):
                raise InputError(f"{path}:{lineno}: no edge between {ev.u + 1} and {ev.v + 1}")
            events.append(ev)
    return events


def _aggregate(stats: list[UpdateStats], algo: str) -> str:
    parts = {}
    for kind in ("decrease", "increase"):
        sel = [s for s in stats if s.kind == kind]
        parts[f"{kind}_calls"] = len(sel)
        parts[f"{kind}_mean_ms"] = 1000.0 * sum(s.seconds for s in sel) / len(sel) if sel else 0.0
    total = UpdateStats(algo, "all")
    for s in stats:
        total.merge(s)
    return _kv(record="aggregate", **parts) + " " + total.record()


def cmd_update(args, out: TextIO) -> int:
    ix = STLIndex.load(args.index)
    events = _read_updates(args.updates, ix.graph)
    stats = ix.update(events, args.algo, batch=args.batch)
    for k, s in enumerate(stats):
        print(s.record(record="update", seq=k), file=out)
    print(_aggregate(stats, args.algo), file=out)
    target = args.out or args.index
    ix.save(target)
    print(_kv(record="saved", out=target, updates=len(events), maintained=len(stats)), file=out)
    return EXIT_OK


def cmd_bench(args, out: TextIO) -> int:
    """Run the same update stream through both families on separate copies."""
    base = STLIndex.load(args.index)
    events = _read_updates(args.updates, base.graph) if args.updates else []
    runs = {"label-search": base.copy(), "pareto": base.copy()}
    all_stats: dict[str, list[UpdateStats]] = {name: [] for name in runs}
    size = args.batch_size or max(1, len(events))
    for b, start in enumerate(range(0, len(events), size), start=1):
        chunk = events[start:start + size]
        pops = {name: 0 for name in runs}
        secs = {name: 0.0 for name in runs}
        for j, proto in enumerate(chunk, start=start):
            for name, ix in runs.items():
                ev = UpdateEvent(proto.u, proto.v, proto.new_weight)
                apply_update(ix.graph, ev)
                if ev.kind is UpdateKind.NOOP:
                    continue
                if name == "pareto":
                    fn = pareto_decrease if ev.kind is UpdateKind.DECREASE else pareto_increase
                    st = fn(ix.graph, ix.hierarchy, ix.labelling, ev)
                else:
                    fn = ls_decrease if ev.kind is UpdateKind.DECREASE else ls_increase
                    st = fn(ix.graph, ix.hierarchy, ix.labelling, [ev])
                all_stats[name].append(st)
                pops[name] += st.pops
                secs[name] += st.seconds
                print(st.record(record="update", batch=b, seq=j, u=ev.u + 1, v=ev.v + 1,
                                old_weight=ev.old_weight, new_weight=ev.new_weight), file=out)
        p, l = pops["pareto"], pops["label-search"]
        print(_kv(record="batch", batch=b, updates=len(chunk), pareto_pops=p, ls_pops=l,
                  direction="pareto<=ls" if p <= l else "pareto>ls",
                  pareto_seconds=secs["pareto"], ls_seconds=secs["label-search"]), file=out)
    for name, stats in all_stats.items():
        print(_aggregate(stats, name), file=out)
    agree = runs["pareto"].labelling == runs["label-search"].labelling
    print(_kv(record="agreement", labellings_equal=str(agree).lower()), file=out)
    if args.random:
        rng = random.Random(args.seed)
        n = base.graph.n
        pairs = [(rng.randrange(n), rng.randrange(n)) for _ in range(args.random)]
        _, ns = _time_queries(runs["pareto"], pairs)
        print(_latency_summary(ns), file=out)
    return EXIT_OK if agree else EXIT_FAIL


def cmd_verify(args, out: TextIO) -> int:
    ix = STLIndex.load(args.index)
    if args.mode == "static":
        rep = verify_static(ix, args.samples, args.seed)
    elif args.mode == "dynamic":
        rep = verify_dynamic(ix, args.updates, args.seed)
    else:
        rep = verify_hierarchy_mode(ix, args.seed)
    for line in rep.lines():
        print(line, file=out)
    if not rep.ok and args.counterexample:
        dump_counterexample(rep, args.counterexample)
        print(f"counterexample={args.counterexample}", file=out)
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_gen_workload(args, out: TextIO) -> int:
    g = _load_graph(args.graph)
    wl = gen_workload(
        g, args.batches, args.batch_size, args.factor, args.seed,
        query_strata=args.query_strata, per_stratum=args.per_stratum,
        random_queries=args.random_queries, l_min=args.l_min,
    )
    paths = write_workload(wl, args.out)
    print(_kv(record="workload", out=args.out, files=len(paths), batches=len(wl.increase_batches),
              l_min=wl.l_min, l_max=wl.l_max, warnings=len(wl.warnings)), file=out)
    for w in wl.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stl", description="Dynamic shortest-path distance oracle (stable tree labelling).")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="build an index from a DIMACS .gr file")
    b.add_argument("graph")
    b.add_argument("--out", help="index path (default: graph path with .stl suffix)")
    b.add_argument("--beta", type=float, default=0.2)
    b.add_argument("--leaf-threshold", type=int, default=8)
    b.add_argument("--partition-seed", type=int, default=0)
    b.add_argument("--partition-restarts", type=int, default=2)
    b.add_argument("--threads", type=int, default=None, help="label construction workers (default: $STL_THREADS or 1)")
    b.set_defaults(func=cmd_build)

    q = sub.add_parser("query", help="answer distance queries")
    q.add_argument("index")
    q.add_argument("queries", nargs="?", help="file of '<s> <t>' lines, 1-based")
    q.add_argument("--random", type=int, default=None, metavar="N", help="N uniform random pairs instead")
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--out", help="write distances here instead of stdout")
    q.add_argument("--quiet", action="store_true", help="timing summary only")
    q.set_defaults(func=cmd_query)

    u = sub.add_parser("update", help="apply weight updates and persist the index")
    u.add_argument("index")
    u.add_argument("updates", help="file of '<u> <v> <new_weight>' lines, 1-based")
    u.add_argument("--algo", choices=("label-search", "pareto"), default="label-search")
    u.add_argument("--batch", action="store_true", help="label search: maintain same-kind runs together")
    u.add_argument("--out", help="updated index path (default: overwrite INDEX)")
    u.set_defaults(func=cmd_update)

    be = sub.add_parser("bench", help="run updates through both algorithms and report work counters")
    be.add_argument("index")
    be.add_argument("updates", nargs="?")
    be.add_argument("--batch-size", type=int, default=None)
    be.add_argument("--random", type=int, default=0, metavar="N", help="also time N random queries")
    be.add_argument("--seed", type=int, default=0)
    be.set_defaults(func=cmd_bench)

    v = sub.add_parser("verify", help="check an index against oracles")
    v.add_argument("index")
    v.add_argument("--mode", choices=("static", "dynamic", "hierarchy"), default="static")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--samples", type=int, default=None, help="static: number of source vertices (default all)")
    v.add_argument("--updates", type=int, default=500, help="dynamic: number of random updates")
    v.add_argument("--counterexample", help="write the first failure as JSON here")
    v.set_defaults(func=cmd_verify)

    w = sub.add_parser("gen-workload", help="generate update batches and stratified query sets")
    w.add_argument("graph", help="DIMACS file or index")
    w.add_argument("--out", required=True, help="output directory")
    w.add_argument("--batches", type=int, default=10)
    w.add_argument("--batch-size", type=int, default=1000)
    w.add_argument("--factor", type=float, default=2.0)
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--query-strata", type=int, default=10)
    w.add_argument("--per-stratum", type=int, default=10000)
    w.add_argument("--random-queries", type=int, default=10000)
    w.add_argument("--l-min", type=float, default=1000.0)
    w.set_defaults(func=cmd_gen_workload)
    return p


def main(argv: Sequence[str] | None = None, out: TextIO | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out or sys.stdout)
    except (InputError, DimacsError, IndexFormatError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
