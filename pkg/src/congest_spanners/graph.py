"""Undirected unweighted graphs, generators and sequential distance oracles.

Nodes are dense integer ids ``0..n-1``. Edges are stored as normalized
``(min, max)`` tuples wherever an edge set is passed around.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Optional, Union

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

Edge = tuple[int, int]
UNREACHED = -1
GNP_MAX_RESEEDS = 16


class GraphError(ValueError):
    """Raised for invalid graph construction or graph files."""


class DisconnectedGraphError(GraphError):
    pass


def normalize_edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


class Graph:
    """Immutable simple undirected graph with sorted adjacency lists."""

    __slots__ = ("_adj", "_adj_sets", "_edge_count")

    def __init__(self, node_count: int, edges: Iterable[tuple[int, int]] = ()):
        if node_count < 1:
            raise GraphError(f"node_count must be positive, got {node_count}")
        nbrs: list[set[int]] = [set() for _ in range(node_count)]
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < node_count and 0 <= v < node_count):
                raise GraphError(f"edge ({u}, {v}) out of range for n={node_count}")
            if u == v:
                raise GraphError(f"self-loop on node {u}")
            nbrs[u].add(v)
            nbrs[v].add(u)
        self._adj = tuple(tuple(sorted(s)) for s in nbrs)
        self._adj_sets = tuple(frozenset(s) for s in nbrs)
        self._edge_count = sum(len(s) for s in nbrs) // 2

    @property
    def node_count(self) -> int:
        return len(self._adj)

    @property
    def edge_count(self) -> int:
        return self._edge_count

    @property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        return self._adj

    def neighbors(self, u: int) -> tuple[int, ...]:
        return self._adj[u]

    def neighbor_set(self, u: int) -> frozenset[int]:
        return self._adj_sets[u]

    def degree(self, u: int) -> int:
        return len(self._adj[u])

    def has_edge(self, u: int, v: int) -> bool:
        return 0 <= u < len(self._adj) and v in self._adj_sets[u]

    def edges(self) -> Iterator[Edge]:
        """Yield every edge once, normalized, in lexicographic order."""
        for u, nb in enumerate(self._adj):
            for v in nb:
                if u < v:
                    yield (u, v)

    def edge_set(self) -> set[Edge]:
        return set(self.edges())

    def subgraph(self, edges: Iterable[Edge]) -> "Graph":
        """Spanning subgraph on the same node set with the given edges."""
        edges = list(edges)
        for u, v in edges:
            if not self.has_edge(u, v):
                raise GraphError(f"({u}, {v}) is not an edge of the graph")
        return Graph(self.node_count, edges)

    def without_edge(self, u: int, v: int) -> "Graph":
        e = normalize_edge(u, v)
        return Graph(self.node_count, (f for f in self.edges() if f != e))

    def to_csr(self) -> csr_matrix:
        n = self.node_count
        indptr = np.zeros(n + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(nb) for nb in self._adj])
        indices = np.fromiter(itertools.chain.from_iterable(self._adj), dtype=np.int64,
                              count=int(indptr[-1]))
        data = np.ones(len(indices), dtype=np.int8)
        return csr_matrix((data, indices, indptr), shape=(n, n))

    def is_connected(self) -> bool:
        if self.node_count == 1:
            return True
        ncomp, _ = connected_components(self.to_csr(), directed=False)
        return ncomp == 1

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Graph) and self._adj == other._adj

    def __hash__(self) -> int:
        return hash(self._adj)

    def __repr__(self) -> str:
        return f"Graph(n={self.node_count}, m={self.edge_count})"


@dataclass(frozen=True)
class PairSet:
    """Unordered relevant pairs; ``tau`` counts the distinct endpoints."""

    pairs: frozenset[Edge]

    def __init__(self, pairs: Iterable[tuple[int, int]] = ()):
        normalized = set()
        for u, v in pairs:
            if u == v:
                raise GraphError(f"pair ({u}, {v}) is not a pair of distinct nodes")
            normalized.add(normalize_edge(int(u), int(v)))
        object.__setattr__(self, "pairs", frozenset(normalized))

    @property
    def tau(self) -> int:
        return len(self.endpoints())

    def endpoints(self) -> set[int]:
        return {x for pair in self.pairs for x in pair}

    def partners(self) -> dict[int, set[int]]:
        out: dict[int, set[int]] = {}
        for u, v in self.pairs:
            out.setdefault(u, set()).add(v)
            out.setdefault(v, set()).add(u)
        return out

    @classmethod
    def product(cls, nodes: Iterable[int]) -> "PairSet":
        """All unordered pairs of distinct nodes from ``nodes`` (S x S)."""
        return cls(itertools.combinations(sorted(set(nodes)), 2))

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[Edge]:
        return iter(sorted(self.pairs))


@dataclass
class BfsTree:
    root: int
    dist: list[int]
    parent: list[int]
    missing_count: Optional[list[int]] = None

    def path_to(self, v: int) -> list[int]:
        """Tree path ``[root, ..., v]``; empty if ``v`` is unreached."""
        if self.dist[v] == UNREACHED:
            return []
        path = [v]
        while path[-1] != self.root:
            path.append(self.parent[path[-1]])
        path.reverse()
        return path

    def tree_edges(self) -> set[Edge]:
        return {normalize_edge(v, p) for v, p in enumerate(self.parent)
                if p != UNREACHED and v != self.root}


# --------------------------------------------------------------------------
# File I/O

def _iter_data_lines(path: Union[str, Path]) -> Iterator[tuple[int, list[str]]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            yield lineno, line.split()


def _parse_int(token: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise GraphError(f"line {lineno}: expected an integer, got {token!r}") from None


def load_graph(path: Union[str, Path]) -> Graph:
    """Read ``n`` (optionally ``n <count>``) then one ``u v`` edge per line."""
    lines = _iter_data_lines(path)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise GraphError("empty graph file") from None
    if len(header) == 2 and header[0] == "n":
        header = header[1:]
    if len(header) != 1:
        raise GraphError(f"line {lineno}: expected node count, got {' '.join(header)!r}")
    n = _parse_int(header[0], lineno)
    if n < 1:
        raise GraphError(f"line {lineno}: node count must be positive")
    edges = []
    for lineno, fields in lines:
        if len(fields) != 2:
            raise GraphError(f"line {lineno}: expected 'u v', got {' '.join(fields)!r}")
        u, v = (_parse_int(f, lineno) for f in fields)
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"line {lineno}: node id out of range [0, {n})")
        if u == v:
            raise GraphError(f"line {lineno}: self-loop on node {u}")
        edges.append((u, v))
    return Graph(n, edges)


def save_graph(g: Graph, path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{g.node_count}\n")
        for u, v in g.edges():
            fh.write(f"{u} {v}\n")


def load_pairs(path: Union[str, Path], n: Optional[int] = None) -> PairSet:
    pairs = []
    for lineno, fields in _iter_data_lines(path):
        if len(fields) != 2:
            raise GraphError(f"line {lineno}: expected 'u v', got {' '.join(fields)!r}")
        u, v = (_parse_int(f, lineno) for f in fields)
        if n is not None and not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"line {lineno}: node id out of range [0, {n})")
        if u == v:
            raise GraphError(f"line {lineno}: pair of identical nodes {u}")
        pairs.append((u, v))
    return PairSet(pairs)


def load_sources(path: Union[str, Path], n: Optional[int] = None) -> frozenset[int]:
    sources = set()
    for lineno, fields in _iter_data_lines(path):
        if len(fields) != 1:
            raise GraphError(f"line {lineno}: expected a single node id")
        u = _parse_int(fields[0], lineno)
        if n is not None and not 0 <= u < n:
            raise GraphError(f"line {lineno}: node id out of range [0, {n})")
        sources.add(u)
    return frozenset(sources)


# --------------------------------------------------------------------------
# Oracles

def bfs(g: Graph, root: int, reference: Optional[set[Edge]] = None) -> BfsTree:
    """Sequential BFS; each node's parent is its smallest-id neighbor one layer up.

    With ``reference`` given, also counts the tree-path edges absent from it.
    """
    n = g.node_count
    if not 0 <= root < n:
        raise GraphError(f"root {root} out of range")
    dist = [UNREACHED] * n
    parent = [UNREACHED] * n
    missing = [UNREACHED] * n if reference is not None else None
    dist[root] = 0
    parent[root] = root
    if missing is not None:
        missing[root] = 0
    frontier = [root]
    d = 0
    adj = g.adjacency
    while frontier:
        d += 1
        nxt = []
        for u in frontier:  # ascending, so the first discoverer has the smallest id
            for w in adj[u]:
                if dist[w] == UNREACHED:
                    dist[w] = d
                    parent[w] = u
                    if missing is not None:
                        missing[w] = missing[u] + (normalize_edge(u, w) not in reference)
                    nxt.append(w)
        nxt.sort()
        frontier = nxt
    return BfsTree(root, dist, parent, missing)


def distances_from(g: Graph, sources: Iterable[int]) -> np.ndarray:
    """Hop distances from each source, shape ``(len(sources), n)``; ``inf`` if unreachable."""
    sources = list(sources)
    if not sources:
        return np.zeros((0, g.node_count))
    if g.edge_count == 0:
        out = np.full((len(sources), g.node_count), np.inf)
        out[np.arange(len(sources)), sources] = 0.0
        return out
    return shortest_path(g.to_csr(), method="D", directed=False, unweighted=True,
                         indices=sources)


def distance_matrix(g: Graph) -> np.ndarray:
    return distances_from(g, range(g.node_count))


def diameter(g: Graph) -> int:
    dm = distance_matrix(g)
    if np.isinf(dm).any():
        raise DisconnectedGraphError("diameter is undefined on a disconnected graph")
    return int(dm.max())


def girth(g: Graph) -> Optional[int]:
    """Length of the shortest cycle, or ``None`` for a forest."""
    best = math.inf
    adj = g.adjacency
    n = g.node_count
    for root in range(n):
        dist = [UNREACHED] * n
        parent = [UNREACHED] * n
        dist[root] = 0
        queue = [root]
        for u in queue:
            if 2 * dist[u] + 1 >= best:
                break
            for w in adj[u]:
                if dist[w] == UNREACHED:
                    dist[w] = dist[u] + 1
                    parent[w] = u
                    queue.append(w)
                elif w != parent[u]:
                    best = min(best, dist[u] + dist[w] + 1)
    return None if best == math.inf else int(best)


# --------------------------------------------------------------------------
# Generators

def gen_gnp(n: int, p: float, seed: int, max_reseeds: int = GNP_MAX_RESEEDS) -> Graph:
    """Connected Erdos-Renyi sample; reseeds with ``seed+1, seed+2, ...`` if disconnected."""
    if not 0.0 <= p <= 1.0:
        raise GraphError(f"edge probability must be in [0, 1], got {p}")
    if n < 1:
        raise GraphError("n must be positive")
    rows, cols = np.triu_indices(n, k=1)
    for attempt in range(max_reseeds + 1):
        rng = np.random.default_rng(seed + attempt)
        keep = rng.random(len(rows)) < p
        g = Graph(n, zip(rows[keep].tolist(), cols[keep].tolist()))
        if g.is_connected():
            return g
    raise DisconnectedGraphError(
        f"G({n}, {p}) stayed disconnected for seeds {seed}..{seed + max_reseeds}")


def is_prime(q: int) -> bool:
    if q < 2:
        return False
    return all(q % d for d in range(2, math.isqrt(q) + 1))


def _projective_points(q: int) -> list[tuple[int, int, int]]:
    """Normalized nonzero vectors of GF(q)^3: first nonzero coordinate equals 1."""
    pts = []
    for vec in itertools.product(range(q), repeat=3):
        lead = next((x for x in vec if x), 0)
        if lead == 1:
            pts.append(vec)
    return pts


def build_projective_incidence(q: int) -> Graph:
    """Point-line incidence graph of PG(2, q); points are ``0..N-1``, lines ``N..2N-1``."""
    if not is_prime(q):
        raise GraphError(f"q must be prime, got {q}")
    pts = _projective_points(q)
    size = len(pts)
    edges = []
    for i, p in enumerate(pts):
        for j, line in enumerate(pts):
            if (p[0] * line[0] + p[1] * line[1] + p[2] * line[2]) % q == 0:
                edges.append((i, size + j))
    return Graph(2 * size, edges)


class LowerBoundGraph(NamedTuple):
    graph: Graph
    pendant: dict[int, int]  # base node v_i' -> pendant node v_i


def build_lowerbound_graph(q: int) -> LowerBoundGraph:
    """Incidence graph of PG(2, q) plus one pendant node hanging off every node."""
    base = build_projective_incidence(q)
    nb = base.node_count
    pendant = {v: nb + v for v in range(nb)}
    edges = list(base.edges()) + list(pendant.items())
    return LowerBoundGraph(Graph(2 * nb, edges), pendant)


def build_general_lowerbound_graph(alpha: int, beta: int, base: Graph) -> LowerBoundGraph:
    """Base graph of girth >= 3*alpha+beta, an apex joined to every base node by a
    private path of ``floor(g/2)`` internal nodes, and one pendant per base node.

    Node layout: base ``0..n'-1``, apex ``n'``, path nodes, then pendants.
    """
    if alpha < 1 or beta < 0:
        raise GraphError("need alpha >= 1 and beta >= 0")
    g_req = 3 * alpha + beta
    base_girth = girth(base)
    if base_girth is not None and base_girth < g_req:
        raise GraphError(f"base girth {base_girth} < required {g_req}")
    nb = base.node_count
    inner = g_req // 2
    apex = nb
    edges = list(base.edges())
    nxt = nb + 1
    for v in range(nb):
        prev = v
        for _ in range(inner):
            edges.append((prev, nxt))
            prev = nxt
            nxt += 1
        edges.append((prev, apex))
    pendant = {}
    for v in range(nb):
        pendant[v] = nxt
        edges.append((v, nxt))
        nxt += 1
    return LowerBoundGraph(Graph(nxt, edges), pendant)


def incidence_edge_index(lb: LowerBoundGraph) -> dict[int, Edge]:
    """1-based lexicographic indexing of the base-graph edges ``e_1..e_m``."""
    base_nodes = set(lb.pendant)
    base_edges = [e for e in lb.graph.edges() if e[0] in base_nodes and e[1] in base_nodes]
    return {k: e for k, e in enumerate(base_edges, start=1)}


def induced_pairs(lb: LowerBoundGraph, edge_ids: Iterable[int],
                  index: Optional[Mapping[int, Edge]] = None) -> PairSet:
    """Pendant pairs ``(v_i, v_j)`` for the base edges ``e_k``, ``k`` in ``edge_ids``."""
    index = incidence_edge_index(lb) if index is None else index
    return PairSet((lb.pendant[index[k][0]], lb.pendant[index[k][1]]) for k in edge_ids)
