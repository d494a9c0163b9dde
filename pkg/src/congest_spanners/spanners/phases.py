"""Phase drivers: each runs one node program over the whole graph and folds the
per-node outputs back into global edge sets.

The driver only assembles results; every decision is taken inside the node
programs from local information. Drivers return ``(result, RoundStats)``.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field

import numpy as np

from ..congest import RoundStats, SimConfig, run_simulation, word_bits
from ..graph import BfsTree, Edge, Graph, PairSet, UNREACHED, normalize_edge
from .params import STREAM_CENTERS, STREAM_ROOTS, STREAM_SET_A, Params
from .programs import (
    CLUSTER_JOIN, ClusterReport, Clustering, EdgeNotice, MultiSourceBfs, Rollback,
)

EdgeSet = set


@dataclass
class ClusterState:
    node_count: int
    centers: frozenset
    membership: dict  # clustered node -> its center
    cluster_edges: set = field(default_factory=set)
    unclustered_edges: set = field(default_factory=set)

    def members(self, center: int) -> list[int]:
        return sorted(v for v, c in self.membership.items() if c == center)

    def clusters(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {c: [] for c in self.centers}
        for v in sorted(self.membership):
            out[self.membership[v]].append(v)
        return out

    @property
    def unclustered(self) -> set:
        return set(range(self.node_count)) - set(self.membership)

    @property
    def edges(self) -> set:
        return self.cluster_edges | self.unclustered_edges


@dataclass
class BfsForest:
    """Forward multi-source BFS state, kept so it can be rolled back."""

    roots: frozenset
    tables: list  # per node: root -> [dist, parent, missing, arrival_round]
    rounds: int
    views: list  # per node: reference neighbors, or None

    def tree(self, root: int) -> BfsTree:
        n = len(self.tables)
        dist = [UNREACHED] * n
        parent = [UNREACHED] * n
        counted = self.views[0] is not None if n else False
        miss = [UNREACHED] * n if counted else None
        for v, table in enumerate(self.tables):
            entry = table.get(root)
            if entry is not None:
                dist[v] = entry[0]
                parent[v] = entry[1]
                if counted:
                    miss[v] = entry[2]
        return BfsTree(root=root, dist=dist, parent=parent, missing_count=miss)


def _adjacency(n: int, edges: Iterable[Edge]) -> list[set]:
    adj: list[set] = [set() for _ in range(n)]
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    return adj


def local_coin(seed: int, stream: int, node: int, p: float) -> bool:
    """A node's private biased coin, reproducible from the master seed."""
    return bool(np.random.default_rng((seed, stream, node)).random() < p)


def clustering_phase(g: Graph, params: Params) -> tuple[ClusterState, RoundStats]:
    inputs = [params.center_prob] * g.node_count
    outs, stats = run_simulation(g, Clustering, inputs, params.sim, stream=STREAM_CENTERS)
    centers, membership = set(), {}
    cluster_edges, open_edges = set(), set()
    for v, (is_center, center, members, added) in enumerate(outs):
        if is_center:
            centers.add(v)
        if center is not None:
            membership[v] = center
        for u, kind in added.items():
            (cluster_edges if kind == CLUSTER_JOIN else open_edges).add(normalize_edge(u, v))
    for v, (_, _, members, _) in enumerate(outs):
        for m in members:
            if membership.get(m) != v:
                raise AssertionError(f"membership of {m} disagrees between endpoints")
    open_edges -= cluster_edges
    state = ClusterState(g.node_count, frozenset(centers), membership, cluster_edges, open_edges)
    return state, stats


def select_bfs_roots(cluster_state: ClusterState, params: Params) -> frozenset:
    """Each center flips a private coin with the root probability."""
    return frozenset(c for c in cluster_state.centers
                     if local_coin(params.seed, STREAM_ROOTS, c, params.root_prob))


def select_set_A(cluster_state: ClusterState, params: Params) -> frozenset:
    """Each center joins A with probability ``min(1, 16 c ln n / ell)``."""
    return frozenset(c for c in cluster_state.centers
                     if local_coin(params.seed, STREAM_SET_A, c, params.a_prob))


def multi_bfs(g: Graph, roots: Iterable[int], reference, sim: SimConfig) -> tuple[BfsForest, RoundStats]:
    """Forward BFS from all ``roots`` together. ``reference`` is an edge set
    (missing edges are counted against it) or None."""
    n = g.node_count
    roots = frozenset(roots)
    views = [None] * n if reference is None else [frozenset(s) for s in _adjacency(n, reference)]
    wb = word_bits(n)
    inputs = [(v in roots, views[v], wb) for v in range(n)]
    tables, stats = run_simulation(g, MultiSourceBfs, inputs, sim)
    return BfsForest(roots, tables, stats.rounds, views), stats


def parallel_bfs_phase(g: Graph, roots: Iterable[int], reference, params: Params
                       ) -> tuple[dict[int, BfsTree], RoundStats]:
    """BFS trees from every root, with missing-edge counts against ``reference``."""
    forest, stats = multi_bfs(g, roots, reference, params.sim)
    return {r: forest.tree(r) for r in sorted(forest.roots)}, stats


def add_bfs_trees(g: Graph, forest: BfsForest, sim: SimConfig) -> tuple[EdgeSet, RoundStats]:
    """Every node adds the edges to its parents in all trees of ``forest``."""
    targets = []
    for v, table in enumerate(forest.tables):
        targets.append({entry[1] for root, entry in table.items() if root != v})
    outs, stats = run_simulation(g, EdgeNotice, targets, sim)
    return _collect(outs), stats


def _collect(outs) -> EdgeSet:
    edges = set()
    for v, nbrs in enumerate(outs):
        for u in nbrs:
            edges.add(normalize_edge(u, v))
    return edges


def _rollback(g: Graph, forest: BfsForest, starts: list, ell: int, sim: SimConfig
              ) -> tuple[EdgeSet, RoundStats]:
    n = g.node_count
    wb = word_bits(n)
    inputs = [(forest.rounds, forest.tables[v], forest.views[v] or frozenset(), starts[v], ell, wb)
              for v in range(n)]
    outs, stats = run_simulation(g, Rollback, inputs, sim)
    return _collect(outs), stats


def _report_and_choose(g: Graph, forest: BfsForest, cluster_state: ClusterState,
                       choosers: frozenset, threshold: float, sim: SimConfig
                       ) -> tuple[list, RoundStats]:
    n = g.node_count
    wb = word_bits(n)
    clusters = cluster_state.clusters()
    roots = sorted(forest.roots)
    inputs = []
    for v in range(n):
        center = cluster_state.membership.get(v)
        if center not in choosers:
            center = None  # only clusters whose center selects need reports
        table = forest.tables[v]
        entries = [(r, table[r][0], table[r][2]) for r in roots if r in table] if center is not None else []
        members = clusters.get(v, ()) if v in choosers else ()
        inputs.append((center, entries, members, v in choosers, threshold, wb))
    outs, stats = run_simulation(g, ClusterReport, inputs, sim)
    return [sorted(o) for o in outs], stats


def _merge(total: RoundStats, part: RoundStats, phase: str) -> None:
    total.absorb(part, phase)


def path_buying_sourcewise(g: Graph, sources: Iterable[int], cluster_state: ClusterState,
                           current: EdgeSet, params: Params) -> tuple[EdgeSet, RoundStats]:
    """For every source and every cluster, buy the shortest source-to-member path
    whose missing-edge count is within the threshold."""
    sim = params.sim
    total = RoundStats(bandwidth=sim.bandwidth(g.node_count))
    forest, st = multi_bfs(g, sources, current, sim)
    _merge(total, st, "path_buy_bfs")
    starts, st = _report_and_choose(g, forest, cluster_state, cluster_state.centers,
                                    params.threshold, sim)
    _merge(total, st, "path_buy_choose")
    bought, st = _rollback(g, forest, starts, -1, sim)
    _merge(total, st, "path_buy_rollback")
    return bought, total


def path_buying_pairwise(g: Graph, pairs: PairSet, current: EdgeSet, params: Params
                         ) -> tuple[EdgeSet, RoundStats]:
    """For every pair whose shortest path misses at most the threshold, buy it.
    The endpoint with the larger id initiates toward the smaller one."""
    sim = params.sim
    total = RoundStats(bandwidth=sim.bandwidth(g.node_count))
    forest, st = multi_bfs(g, pairs.endpoints(), current, sim)
    _merge(total, st, "path_buy_bfs")
    starts = []
    thr = params.threshold
    partners = pairs.partners()
    for v in range(g.node_count):
        table = forest.tables[v]
        starts.append([u for u in partners.get(v, ()) if u < v and table[u][2] <= thr])
    bought, st = _rollback(g, forest, starts, -1, sim)
    _merge(total, st, "path_buy_rollback")
    return bought, total


def prefix_suffix_buying(g: Graph, pairs: PairSet, current: EdgeSet, params: Params
                         ) -> tuple[EdgeSet, RoundStats]:
    """Along each pair's BFS path, buy the ``ceil(ell)`` missing edges nearest
    each end."""
    sim = params.sim
    total = RoundStats(bandwidth=sim.bandwidth(g.node_count))
    forest, st = multi_bfs(g, pairs.endpoints(), current, sim)
    _merge(total, st, "prefix_suffix_bfs")
    partners = pairs.partners()
    starts = [[u for u in partners.get(v, ()) if u < v] for v in range(g.node_count)]
    bought, st = _rollback(g, forest, starts, params.ell_edges, sim)
    _merge(total, st, "prefix_suffix_rollback")
    return bought, total


def path_buying_4p(g: Graph, A: Iterable[int], cluster_state: ClusterState,
                   current: EdgeSet, params: Params) -> tuple[EdgeSet, RoundStats]:
    """For every ordered pair of centers in A, buy the shortest qualifying path
    from the first to a member of the second's cluster."""
    sim = params.sim
    A = frozenset(A)
    total = RoundStats(bandwidth=sim.bandwidth(g.node_count))
    forest, st = multi_bfs(g, A, current, sim)
    _merge(total, st, "path_buy_bfs")
    starts, st = _report_and_choose(g, forest, cluster_state, A, params.threshold, sim)
    _merge(total, st, "path_buy_choose")
    bought, st = _rollback(g, forest, starts, -1, sim)
    _merge(total, st, "path_buy_rollback")
    return bought, total


def bfs_union(g: Graph, roots: Iterable[int], sim: SimConfig) -> tuple[EdgeSet, RoundStats]:
    """Union of BFS trees from ``roots`` (the dense-input fallback)."""
    total = RoundStats(bandwidth=sim.bandwidth(g.node_count))
    forest, st = multi_bfs(g, roots, None, sim)
    _merge(total, st, "bfs")
    edges, st = add_bfs_trees(g, forest, sim)
    _merge(total, st, "bfs_notice")
    return edges, total


def tree_edges(trees: Mapping[int, BfsTree]) -> EdgeSet:
    out = set()
    for t in trees.values():
        out.update(t.tree_edges())
    return out
