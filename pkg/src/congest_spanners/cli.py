"""Command-line experiment driver.

    spanners run --algo 2p --gnp 300,0.05 --pairs random:50 --seed 1 --reps 5
    spanners lowerbound --q 3 --p 10 --seed 4
    spanners table results.csv

Results are CSV rows; ``table`` turns them into a markdown summary.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import statistics
import sys
from collections import defaultdict
from pathlib import Path
from typing import Optional

import numpy as np

from .congest import SimulationTimeout
from .graph import (
    Graph, GraphError, PairSet, build_lowerbound_graph, build_projective_incidence, diameter,
    gen_gnp, incidence_edge_index, is_prime, load_graph, load_pairs, load_sources,
)
from .lowerbound import CutReport, random_instance, run_cut_simulation
from .spanners import AlgoConfig, build_spanner
from .spanners.params import ALGORITHMS, INPUT_KIND
from .verify import (
    CSV_FIELDS, csv_row, input_param, required_pairs, round_report, size_report, verify_stretch,
)

log = logging.getLogger("congest_spanners")

RUN_FIELDS = CSV_FIELDS + ("seed", "w")
_INPUT_STREAM = 101  # RNG stream for random sources/pairs, separate from node coins


class UsageError(Exception):
    pass


def _setup_logging() -> None:
    level = os.environ.get("SPANNER_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _parse_gnp(text: str) -> tuple[int, float]:
    try:
        n_text, p_text = text.split(",")
        n, p = int(n_text), float(p_text)
    except ValueError:
        raise UsageError(f"--gnp expects 'n,p', got {text!r}") from None
    if n < 1 or not 0 <= p <= 1:
        raise UsageError(f"--gnp needs n >= 1 and 0 <= p <= 1, got {text!r}")
    return n, p


def _make_graph(args, seed: int) -> Graph:
    if args.gnp:
        n, p = _parse_gnp(args.gnp)
        return gen_gnp(n, p, seed)
    if args.graph:
        return load_graph(args.graph)
    if args.pg is not None:
        return build_projective_incidence(args.pg)
    return build_lowerbound_graph(args.lbgraph).graph


def _random_k(text: str) -> Optional[int]:
    if not text.startswith("random:"):
        return None
    try:
        k = int(text.split(":", 1)[1])
    except ValueError:
        raise UsageError(f"bad random spec {text!r}") from None
    if k < 0:
        raise UsageError("random:k needs k >= 0")
    return k


def _make_input(args, g: Graph, seed: int):
    kind = INPUT_KIND[args.algo]
    n = g.node_count
    rng = np.random.default_rng((seed, _INPUT_STREAM))
    if kind == "sources":
        k = _random_k(args.sources)
        if k is None:
            return load_sources(args.sources, n)
        if k > n:
            raise UsageError(f"cannot pick {k} sources from {n} nodes")
        return frozenset(rng.choice(n, size=k, replace=False).tolist())
    if kind == "pairs":
        k = _random_k(args.pairs)
        if k is None:
            return load_pairs(args.pairs, n)
        if k > n * (n - 1) // 2:
            raise UsageError(f"cannot pick {k} distinct pairs from {n} nodes")
        chosen: set = set()
        while len(chosen) < k:
            u, v = rng.choice(n, size=2, replace=False).tolist()
            chosen.add((min(u, v), max(u, v)))
        return PairSet(chosen)
    return None


def _check_run_args(args) -> None:
    kind = INPUT_KIND[args.algo]
    if args.reps < 1:
        raise UsageError("--reps must be at least 1")
    if kind == "sources" and (args.sources is None or args.pairs is not None):
        raise UsageError(f"--algo {args.algo.lower()} takes --sources and no --pairs")
    if kind == "pairs" and (args.pairs is None or args.sources is not None):
        raise UsageError(f"--algo {args.algo.lower()} takes --pairs and no --sources")
    if kind is None and (args.pairs is not None or args.sources is not None):
        raise UsageError(f"--algo {args.algo.lower()} takes neither --sources nor --pairs")
    if args.c <= 0:
        raise UsageError("--c must be positive")
    if args.bandwidth_mult < 1:
        raise UsageError("--bandwidth-mult must be at least 1")
    if args.max_rounds is not None and args.max_rounds < 1:
        raise UsageError("--max-rounds must be at least 1")
    q = args.pg if args.pg is not None else args.lbgraph
    if q is not None and not is_prime(q):
        raise UsageError("--pg/--lbgraph need a prime q")


def run_once(args, rep: int) -> tuple[list, bool]:
    """One repetition: build, run, verify. Returns the CSV row and whether it failed."""
    seed = args.seed + rep
    g = _make_graph(args, seed)
    inp = _make_input(args, g, seed)
    n = g.node_count
    d = diameter(g)
    cfg = AlgoConfig(args.algo, c=args.c, seed=seed, bandwidth_multiplier=args.bandwidth_mult,
                     max_rounds=args.max_rounds)
    param = input_param(args.algo, inp)
    try:
        result = build_spanner(g, inp, cfg)
    except SimulationTimeout as exc:
        log.error("rep %d (seed %d) timed out: %s", rep, seed, exc)
        row = [args.algo.lower(), n, d, param, "", "", exc.stats.rounds, "", "", "timeout",
               seed, args.bandwidth_mult]
        return row, True
    pairs = len(inp) if isinstance(inp, PairSet) else 0
    sources = 0 if inp is None or isinstance(inp, PairSet) else len(inp)
    size = size_report(result, n, sources=sources, pairs=pairs)
    rounds = round_report(result.stats, args.algo, param, d, n)
    stretch = verify_stretch(g, result.h_edges, required_pairs(args.algo, inp), 1, result.stretch)
    for u, v, dg, dh in stretch.violations[:10]:
        log.error("stretch violation seed=%d pair=(%d,%d) dist_G=%s dist_H=%s", seed, u, v, dg, dh)
    row = csv_row(args.algo, n, d, param, size, rounds, stretch) + [seed, args.bandwidth_mult]
    return row, bool(stretch.violations)


def _open_out(path: Optional[str], fields) -> tuple[io.TextIOBase, csv.writer, bool]:
    if path is None or path == "-":
        fh = sys.stdout
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(fields)
        return fh, writer, False
    fresh = not Path(path).exists() or Path(path).stat().st_size == 0
    fh = open(path, "a", newline="", encoding="utf-8")
    writer = csv.writer(fh, lineterminator="\n")
    if fresh:
        writer.writerow(fields)
    return fh, writer, True


def cmd_run(args) -> int:
    args.algo = args.algo.upper()
    _check_run_args(args)
    fh, writer, close = _open_out(args.out, RUN_FIELDS)
    failed = False
    try:
        for rep in range(args.reps):
            row, bad = run_once(args, rep)
            writer.writerow(row)
            failed |= bad
    finally:
        if close:
            fh.close()
    return 1 if failed else 0


def cmd_lowerbound(args) -> int:
    algo = args.algo.upper()
    if algo not in ("2P", "4P"):
        raise UsageError("lowerbound runs a pairwise algorithm (2p or 4p)")
    if not is_prime(args.q):
        raise UsageError("--q must be prime")
    if args.reps < 1:
        raise UsageError("--reps must be at least 1")
    lb = build_lowerbound_graph(args.q)
    m = len(incidence_edge_index(lb))
    if args.p < 0 or 3 * args.p > m:
        raise UsageError(f"--p must lie in 0..{m // 3} for q={args.q} (m={m})")
    fh, writer, close = _open_out(args.out, CutReport.FIELDS)
    failed = False
    try:
        for rep in range(args.reps):
            seed = args.seed + rep
            inst = random_instance(m, args.p, seed)
            cfg = AlgoConfig(algo, c=args.c, seed=seed, bandwidth_multiplier=args.bandwidth_mult,
                             max_rounds=args.max_rounds, trace=True)
            try:
                _, _, report = run_cut_simulation(lb, inst.x, cfg, q=args.q)
            except SimulationTimeout as exc:
                log.error("rep %d timed out: %s", rep, exc)
                failed = True
                continue
            writer.writerow(report.row())
            failed |= report.forced_present != report.p
    finally:
        if close:
            fh.close()
    return 1 if failed else 0


def _float(text: str) -> Optional[float]:
    try:
        return float(text)
    except (TypeError, ValueError):
        return None


def summarize(rows: list[dict]) -> str:
    """Markdown table of per-algorithm medians."""
    if not rows:
        raise UsageError("no result rows to tabulate")
    groups: dict[str, list[dict]] = defaultdict(list)
    for row in rows:
        groups[row["algo"]].append(row)
    lines = ["| algo | runs | median ratio_size | median ratio_rounds | violating runs |",
             "|---|---|---|---|---|"]
    for algo in sorted(groups):
        group = groups[algo]
        sizes = [x for x in (_float(r["ratio_size"]) for r in group) if x is not None]
        rounds = [x for x in (_float(r["ratio_rounds"]) for r in group) if x is not None]
        bad = sum(1 for r in group if r["violations"] not in ("0", ""))
        med_s = f"{statistics.median(sizes):.4f}" if sizes else "n/a"
        med_r = f"{statistics.median(rounds):.4f}" if rounds else "n/a"
        lines.append(f"| {algo} | {len(group)} | {med_s} | {med_r} | {bad} |")
    return "\n".join(lines) + "\n"


def cmd_table(args) -> int:
    rows: list[dict] = []
    for path in args.csv:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            missing = [f for f in CSV_FIELDS if f not in (reader.fieldnames or ())]
            if reader.fieldnames and missing:
                raise UsageError(f"{path}: missing columns {', '.join(missing)}")
            rows.extend(reader)
    sys.stdout.write(summarize(rows))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spanners",
                                     description="Simulated CONGEST construction of additive spanners.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="build, run, verify and report")
    run.add_argument("--algo", required=True, type=str.upper, choices=ALGORITHMS,
                     metavar="{2s,2p,4p,4ap,8ap,sub2,sub4}")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--gnp", metavar="N,P", help="Erdos-Renyi graph, reseeded until connected")
    src.add_argument("--graph", metavar="FILE", help="edge-list file")
    src.add_argument("--pg", type=int, metavar="Q", help="point-line incidence graph of PG(2,Q)")
    src.add_argument("--lbgraph", type=int, metavar="Q", help="incidence graph plus pendants")
    run.add_argument("--sources", metavar="FILE|random:k")
    run.add_argument("--pairs", metavar="FILE|random:k")
    run.add_argument("--c", type=float, default=3.0)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--bandwidth-mult", type=int, default=4)
    run.add_argument("--max-rounds", type=int, default=None)
    run.add_argument("--reps", type=int, default=1)
    run.add_argument("--out", default=None, help="CSV file to append to (default: stdout)")
    run.set_defaults(func=cmd_run)

    lb = sub.add_parser("lowerbound", help="cut-communication experiment on the lower-bound graph")
    lb.add_argument("--q", type=int, required=True)
    lb.add_argument("--p", type=int, required=True)
    lb.add_argument("--algo", default="2p", type=str.upper, choices=("2P", "4P"), metavar="{2p,4p}")
    lb.add_argument("--c", type=float, default=3.0)
    lb.add_argument("--seed", type=int, default=0)
    lb.add_argument("--bandwidth-mult", type=int, default=4)
    lb.add_argument("--max-rounds", type=int, default=None)
    lb.add_argument("--reps", type=int, default=1)
    lb.add_argument("--out", default=None)
    lb.set_defaults(func=cmd_lowerbound)

    table = sub.add_parser("table", help="markdown summary of result CSVs")
    table.add_argument("csv", nargs="+")
    table.set_defaults(func=cmd_table)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, GraphError, OSError) as exc:
        parser.error(str(exc))
    return 2


if __name__ == "__main__":
    sys.exit(main())
