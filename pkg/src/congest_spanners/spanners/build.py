"""Phase pipelines of the seven spanner constructions."""

from __future__ import annotations

import json
import logging
import math
import operator
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Union

from ..congest import DEFAULT_ROUNDS_FACTOR, RoundStats, SimConfig, gather_and_spread
from ..graph import DisconnectedGraphError, Edge, Graph, GraphError, PairSet, diameter
from .params import (
    INPUT_KIND, LOG_BASE, STREAM_GATHER, STRETCH, AlgoConfig, Params, compute_h, resolve,
)
from .phases import (
    ClusterState, add_bfs_trees, bfs_union, clustering_phase, multi_bfs,
    path_buying_4p, path_buying_pairwise, path_buying_sourcewise, prefix_suffix_buying,
    select_bfs_roots, select_set_A,
)

log = logging.getLogger(__name__)

TAGS = ("cluster", "unclustered", "bfs", "prefix_suffix", "path_buy")


class InputKindError(GraphError):
    pass


@dataclass
class SpannerResult:
    h_edges: frozenset
    attribution: dict  # edge -> phase tag
    stats: RoundStats
    config: AlgoConfig
    params: Optional[Params] = None
    info: dict = field(default_factory=dict)

    @property
    def stretch(self) -> int:
        return STRETCH[self.info.get("ran", self.config.algorithm)]

    def edge_count(self) -> int:
        return len(self.h_edges)

    def to_graph(self, g: Graph) -> Graph:
        return g.subgraph(self.h_edges)

    def tag_counts(self) -> dict[str, int]:
        counts = dict.fromkeys(TAGS, 0)
        for tag in self.attribution.values():
            counts[tag] += 1
        return counts

    def metadata(self) -> dict:
        cfg = asdict(self.config)
        params = None
        if self.params is not None:
            params = {k: v for k, v in asdict(self.params).items() if k != "sim"}
            params = {k: (None if isinstance(v, float) and math.isinf(v) else v)
                      for k, v in params.items()}
        return {"algorithm": self.config.algorithm, "edges": len(self.h_edges),
                "log_base": LOG_BASE, "config": cfg, "params": params,
                "stats": self.stats.as_dict(), "edges_by_phase": self.tag_counts(),
                "info": self.info}

    def write(self, edge_path: Union[str, Path], meta_path: Union[str, Path, None] = None) -> None:
        """Write ``u v tag`` lines, plus a JSON metadata record if requested."""
        with open(edge_path, "w", encoding="utf-8") as fh:
            for u, v in sorted(self.h_edges):
                fh.write(f"{u} {v} {self.attribution[(u, v)]}\n")
        if meta_path is not None:
            with open(meta_path, "w", encoding="utf-8") as fh:
                json.dump(self.metadata(), fh, indent=2, sort_keys=True)
                fh.write("\n")


class _Pipeline:
    """Mutable run state: the growing spanner and the accumulated statistics."""

    def __init__(self, g: Graph, cfg: AlgoConfig, sim: SimConfig):
        self.g = g
        self.cfg = cfg
        self.sim = sim
        self.h: set = set()
        self.attribution: dict[Edge, str] = {}
        self.stats = RoundStats(bandwidth=sim.bandwidth(g.node_count))
        if sim.trace:
            self.stats.trace, self.stats.edge_bits = [], {}
        self.info: dict = {}
        self.params: Optional[Params] = None

    def add(self, edges, tag: str) -> None:
        for e in edges:
            if e not in self.attribution:
                self.attribution[e] = tag
                self.h.add(e)

    def absorb(self, stats: RoundStats, phase: str) -> None:
        self.stats.absorb(stats, phase)
        log.debug("%s: %d rounds, %d messages", phase, stats.rounds, stats.messages_sent)

    def gather(self, values: list, phase: str) -> int:
        outs, st = gather_and_spread(self.g, values, operator.add, self.sim, stream=STREAM_GATHER)
        self.absorb(st, phase)
        return outs[0]

    def resolve(self, algorithm: str, h: float, with_ell: bool = False) -> Params:
        self.params = resolve(self.cfg, self.g.node_count, h, self.sim, with_ell=with_ell)
        self.info["h"] = self.params.h
        if with_ell:
            self.info["ell"] = self.params.ell
        return self.params

    def result(self) -> SpannerResult:
        g = self.g
        for u, v in self.h:
            if not g.has_edge(u, v):
                raise AssertionError(f"spanner edge ({u}, {v}) is not a graph edge")
        return SpannerResult(frozenset(self.h), dict(self.attribution), self.stats,
                             self.cfg, self.params, self.info)

    # -- shared building blocks ------------------------------------------

    def cluster_and_bfs(self, params: Params) -> ClusterState:
        g = self.g
        clusters, st = clustering_phase(g, params)
        self.absorb(st, "clustering")
        self.add(sorted(clusters.cluster_edges), "cluster")
        self.add(sorted(clusters.unclustered_edges), "unclustered")
        roots = select_bfs_roots(clusters, params)
        forest, st = multi_bfs(g, roots, None, self.sim)
        self.absorb(st, "bfs")
        edges, st = add_bfs_trees(g, forest, self.sim)
        self.absorb(st, "bfs_notice")
        self.add(sorted(edges), "bfs")
        self.info.update(centers=len(clusters.centers), bfs_roots=len(roots),
                         unclustered=len(clusters.unclustered))
        return clusters

    def bfs_from(self, roots) -> None:
        edges, st = bfs_union(self.g, roots, self.sim)
        self.absorb(st, "bfs")
        self.add(sorted(edges), "bfs")

    # -- algorithms --------------------------------------------------------

    def run_2s(self, sources: frozenset, h: Optional[float] = None, sized: bool = True) -> None:
        g = self.g
        if h is None:
            h = compute_h("2S", g.node_count, sources=len(sources))
        params = self.resolve("2S", h)
        if sized and self.cfg.fallbacks and params.h >= len(sources):
            self.info["fallback"] = "bfs_from_sources"
            self.bfs_from(sources)
            return
        clusters = self.cluster_and_bfs(params)
        if sources is None:  # 4AP: the centers are the sources
            sources = clusters.centers
        bought, st = path_buying_sourcewise(g, sources, clusters, self.h, params)
        self.absorb(st, "path_buying")
        self.add(sorted(bought), "path_buy")

    def run_2p(self, pairs: PairSet, size: int, tau: int) -> None:
        g = self.g
        if size == 0:
            self.info["fallback"] = "no_pairs"
            return
        params = self.resolve("2P", compute_h("2P", g.node_count, pairs=size))
        ln = math.log(g.node_count) if g.node_count > 1 else 0.0
        cutoff = 2 * self.cfg.c ** 2 * size ** (1 / 3) * ln ** (2 / 3)
        if self.cfg.fallbacks and tau < cutoff:
            self.info["fallback"] = "bfs_from_endpoints"
            self.bfs_from(pairs.endpoints())
            return
        self.cluster_and_bfs(params)
        bought, st = path_buying_pairwise(g, pairs, self.h, params)
        self.absorb(st, "path_buying")
        self.add(sorted(bought), "path_buy")

    def run_4p(self, pairs: Optional[PairSet], size: int, tau: int, h: Optional[float] = None) -> None:
        g = self.g
        n = g.node_count
        ln = math.log(n) if n > 1 else 0.0
        if h is None and self.cfg.fallbacks and size < ln ** 4:
            self.info["fallback"] = "delegate_2p"
            self.info["ran"] = "2P"
            self.run_2p(pairs, size, tau)
            return
        if h is None:
            h = compute_h("4P", n, pairs=size)
        params = self.resolve("4P", h, with_ell=True)
        clusters = self.cluster_and_bfs(params)
        if pairs is None:  # 8AP: all pairs of centers
            pairs = PairSet.product(clusters.centers)
        bought, st = prefix_suffix_buying(g, pairs, self.h, params)
        self.absorb(st, "prefix_suffix")
        self.add(sorted(bought), "prefix_suffix")
        A = select_set_A(clusters, params)
        self.info["set_A"] = len(A)
        bought, st = path_buying_4p(g, A, clusters, self.h, params)
        self.absorb(st, "path_buying")
        self.add(sorted(bought), "path_buy")


def _check_input(algorithm: str, inp, n: int):
    kind = INPUT_KIND[algorithm]
    if kind is None:
        if inp is not None:
            raise InputKindError(f"{algorithm} takes no source or pair input")
        return None
    if kind == "pairs":
        if not isinstance(inp, PairSet):
            raise InputKindError(f"{algorithm} needs a PairSet input")
        for u, v in inp.pairs:
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"pair ({u}, {v}) out of range")
        return inp
    if isinstance(inp, PairSet) or inp is None or isinstance(inp, (str, bytes)):
        raise InputKindError(f"{algorithm} needs a source set input")
    sources = frozenset(int(s) for s in inp)
    for s in sources:
        if not 0 <= s < n:
            raise GraphError(f"source {s} out of range")
    return sources


def default_sim(g: Graph, cfg: AlgoConfig) -> SimConfig:
    """Simulation settings of one run; the round cap is fixed up front."""
    limit = cfg.max_rounds
    if limit is None:
        limit = DEFAULT_ROUNDS_FACTOR * (g.node_count + diameter(g))
    return SimConfig(bandwidth_multiplier=cfg.bandwidth_multiplier, max_rounds=limit,
                     seed=cfg.seed, trace=cfg.trace)


def build_spanner(g: Graph, inp, cfg: AlgoConfig) -> SpannerResult:
    """Run the distributed construction ``cfg.algorithm`` on ``g``.

    ``inp`` is a collection of source ids (2S, SUB2, SUB4), a :class:`PairSet`
    (2P, 4P) or None (4AP, 8AP).
    """
    algorithm = cfg.algorithm
    n = g.node_count
    inp = _check_input(algorithm, inp, n)
    if n == 0:
        raise GraphError("empty graph")
    if not g.is_connected():
        raise DisconnectedGraphError("the communication graph must be connected")
    run = _Pipeline(g, cfg, default_sim(g, cfg))
    run.info["ran"] = algorithm
    ln = math.log(n) if n > 1 else 0.0

    run.gather([1] * n, "count_nodes")
    if algorithm in ("2S", "SUB2", "SUB4"):
        s_count = run.gather([int(v in inp) for v in range(n)], "count_sources")
        if algorithm == "2S":
            run.run_2s(inp)
        elif algorithm == "SUB2":
            if cfg.fallbacks and s_count > n ** 0.6 * ln ** 0.2:
                run.info.update(fallback="sourcewise", ran="2S")
                run.run_2s(inp)
            else:
                run.info["ran"] = "2P"
                pairs = PairSet.product(inp)
                tau = s_count if s_count > 1 else 0
                run.run_2p(pairs, s_count ** 2 if pairs else 0, tau)
        else:
            if cfg.fallbacks and ln > 0 and s_count > n ** 0.7 * ln ** -0.1:
                run.info.update(fallback="all_pairs", ran="4AP")
                run.run_2s(None, h=compute_h("4AP", n), sized=False)
            else:
                run.info["ran"] = "4P"
                pairs = PairSet.product(inp)
                tau = s_count if s_count > 1 else 0
                run.run_4p(pairs, s_count ** 2 if pairs else 0, tau)
    elif algorithm in ("2P", "4P"):
        partners = inp.partners()
        size = run.gather([sum(1 for u in partners.get(v, ()) if u > v) for v in range(n)],
                          "count_pairs")
        tau = run.gather([int(v in partners) for v in range(n)], "count_endpoints")
        if algorithm == "2P":
            run.run_2p(inp, size, tau)
        else:
            run.run_4p(inp, size, tau)
    elif algorithm == "4AP":
        run.run_2s(None, h=compute_h("4AP", n), sized=False)
    else:
        run.run_4p(None, 0, 0, h=compute_h("8AP", n))
    result = run.result()
    log.info("%s on n=%d: %d edges, %d rounds", algorithm, n, len(result.h_edges), result.stats.rounds)
    return result
