"""The partition-complement reduction behind the pairwise round lower bound.

Alice holds ``x``, a ``p``-subset of incidence-edge indices ``1..m``. The pairs
``(v_i, v_j)`` of pendant nodes whose base edge ``e_k`` has ``k`` in ``x`` are
handed to a +2 pairwise spanner algorithm. Girth 6 forces every such ``e_k``
into the spanner, so the absent incidence edges form an answer ``y`` disjoint
from ``x``. The simulation is split between Alice (pendants) and Bob (the
incidence graph), and the bits crossing that cut are counted.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .congest import account_cut_bits
from .graph import (
    Edge, GraphError, LowerBoundGraph, PairSet, UNREACHED, bfs, incidence_edge_index,
    induced_pairs, normalize_edge,
)
from .spanners import AlgoConfig, SpannerResult, build_spanner

# the two-party cost is at least p/100 bits; recorded as a reference line only
REFERENCE_FRACTION = 1 / 100


def answer_size(m: int) -> int:
    """Size of Bob's answer; odd ``m`` rounds down."""
    return m // 2


@dataclass(frozen=True)
class PartCompInstance:
    m: int
    p: int
    x: frozenset

    def __init__(self, m: int, x: Iterable[int], p: Optional[int] = None):
        x = frozenset(int(k) for k in x)
        p = len(x) if p is None else p
        if m < 1:
            raise ValueError("m must be positive")
        if len(x) != p:
            raise ValueError(f"|x| = {len(x)} but p = {p}")
        if 3 * p > m:
            raise ValueError(f"p = {p} exceeds m/3 = {m / 3:g}")
        if any(not 1 <= k <= m for k in x):
            raise ValueError("x must be a subset of 1..m")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "x", x)


@dataclass(frozen=True)
class PartCompAnswer:
    y: frozenset

    def __init__(self, y: Iterable[int]):
        object.__setattr__(self, "y", frozenset(int(k) for k in y))


def partcomp_check(inst: PartCompInstance, ans: PartCompAnswer) -> bool:
    """True iff ``|y| = m/2``, ``y`` lies in ``1..m`` and misses ``x``."""
    y = ans.y
    return (len(y) == answer_size(inst.m) and all(1 <= k <= inst.m for k in y)
            and not (y & inst.x))


def random_instance(m: int, p: int, seed: int) -> PartCompInstance:
    rng = np.random.default_rng(seed)
    x = rng.choice(np.arange(1, m + 1), size=p, replace=False)
    return PartCompInstance(m, x.tolist(), p)


def _base_of(lb: LowerBoundGraph) -> dict[int, int]:
    return {pend: base for base, pend in lb.pendant.items()}


def forced_edges(lb: LowerBoundGraph, pairs: PairSet, check: bool = True) -> set[Edge]:
    """Base edges that any +2 spanner for ``pairs`` must keep.

    Every pair must consist of two pendants whose base nodes are adjacent. With
    ``check`` set, each forced edge is removed in turn and the pair's distance
    is confirmed to exceed its original distance by more than 2.
    """
    base_of = _base_of(lb)
    g = lb.graph
    forced = set()
    for u, v in pairs:
        if u not in base_of or v not in base_of:
            raise GraphError(f"pair ({u}, {v}) is not a pair of pendant nodes")
        e = normalize_edge(base_of[u], base_of[v])
        if not g.has_edge(*e):
            raise GraphError(f"pair ({u}, {v}) has no corresponding base edge")
        forced.add(e)
    if check:
        for u, v in pairs:
            e = normalize_edge(base_of[u], base_of[v])
            before = bfs(g, u).dist[v]
            after = bfs(g.without_edge(*e), u).dist[v]
            if after != UNREACHED and after <= before + 2:
                raise AssertionError(f"edge {e} is not forced for pair ({u}, {v})")
    return forced


def reduction_extract_y(lb: LowerBoundGraph, x: Iterable[int], h_edges: Iterable[Edge],
                        index: Optional[Mapping[int, Edge]] = None) -> Optional[PartCompAnswer]:
    """Bob's answer: the smallest ``m/2`` indices of base edges absent from H.

    Returns None when fewer than ``m/2`` base edges are absent, i.e. the spanner
    is too dense for the reduction. ``x`` is accepted for symmetry with the
    instance but Bob does not look at it.
    """
    del x
    index = incidence_edge_index(lb) if index is None else index
    h = set(h_edges)
    g = lb.graph
    for e in h:
        if not g.has_edge(*e):
            raise GraphError(f"{e} is not an edge of the lower-bound graph")
    absent = sorted(k for k, e in index.items() if e not in h)
    need = answer_size(len(index))
    if len(absent) < need:
        return None
    return PartCompAnswer(absent[:need])


def alice_side(lb: LowerBoundGraph) -> list[int]:
    """Partition labels: 1 for the pendants Alice simulates, 0 for Bob's nodes."""
    side = [0] * lb.graph.node_count
    for pend in lb.pendant.values():
        side[pend] = 1
    return side


@dataclass
class CutReport:
    q: int
    n: int
    m: int
    p: int
    bits_cut: int
    p_over_100: float
    rounds: int
    spanner_edges: int
    forced_present: int
    result: SpannerResult
    pairs: PairSet

    FIELDS = ("q", "n", "m", "p", "bits_cut", "p_over_100", "rounds", "spanner_edges",
              "forced_present")

    def row(self) -> list:
        return [self.q, self.n, self.m, self.p, self.bits_cut, f"{self.p_over_100:.2f}",
                self.rounds, self.spanner_edges, self.forced_present]


def run_cut_simulation(lb: LowerBoundGraph, x: Iterable[int], cfg: AlgoConfig,
                       q: int = 0) -> tuple[int, SpannerResult, CutReport]:
    """Run a pairwise spanner algorithm on the pairs induced by ``x`` with message
    tracing, and count the bits exchanged between Alice's and Bob's nodes."""
    x = sorted(set(x))
    index = incidence_edge_index(lb)
    pairs = induced_pairs(lb, x, index)
    if not cfg.trace:
        cfg = replace(cfg, trace=True)
    result = build_spanner(lb.graph, pairs, cfg)
    bits = account_cut_bits(result.stats, alice_side(lb))
    forced = forced_edges(lb, pairs, check=False)
    report = CutReport(q=q, n=lb.graph.node_count, m=len(index), p=len(x), bits_cut=bits,
                       p_over_100=len(x) * REFERENCE_FRACTION, rounds=result.stats.rounds,
                       spanner_edges=len(result.h_edges),
                       forced_present=len(forced & result.h_edges), result=result, pairs=pairs)
    return bits, result, report


def lowerbound_round_floor(p: int, n: int) -> float:
    """Rounds implied by ``p`` cut bits when ``n/2`` edges carry ``log n`` bits each."""
    if n < 2:
        return 0.0
    return p / ((n / 2) * math.log2(n))
