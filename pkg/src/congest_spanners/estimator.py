"""scikit-learn style front end: ``AdditiveSpanner().fit(G, S).transform(G)``."""

from __future__ import annotations

from typing import Optional

import numpy as np
from scipy import sparse
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .graph import Graph, GraphError, PairSet
from .spanners import AlgoConfig, build_spanner
from .spanners.params import INPUT_KIND, normalize_algorithm
from .verify import StretchReport, required_pairs, verify_stretch


def check_graph(G) -> Graph:
    """Accept a Graph, a square adjacency matrix (dense or sparse), or an edge
    list ``(n, edges)``."""
    if isinstance(G, Graph):
        return G
    if isinstance(G, tuple) and len(G) == 2:
        n, edges = G
        return Graph(int(n), edges)
    if sparse.issparse(G) or isinstance(G, np.ndarray):
        mat = sparse.coo_matrix(G)
        if mat.shape[0] != mat.shape[1]:
            raise GraphError(f"adjacency matrix must be square, got {mat.shape}")
        edges = {(min(i, j), max(i, j)) for i, j, w in zip(mat.row, mat.col, mat.data)
                 if w and i != j}
        return Graph(mat.shape[0], edges)
    raise GraphError(f"cannot interpret {type(G).__name__} as a graph")


def check_sources(S, n: int) -> frozenset:
    if isinstance(S, PairSet) or S is None:
        raise GraphError("expected a collection of source nodes")
    out = frozenset(int(s) for s in S)
    bad = [s for s in out if not 0 <= s < n]
    if bad:
        raise GraphError(f"sources out of range: {sorted(bad)[:5]}")
    return out


def check_pairs(P, n: int) -> PairSet:
    pairs = P if isinstance(P, PairSet) else PairSet(P)
    for u, v in pairs.pairs:
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"pair ({u}, {v}) out of range")
    return pairs


class AdditiveSpanner(BaseEstimator, TransformerMixin):
    """Purely additive spanner built by a simulated CONGEST algorithm.

    ``fit(G, y)`` takes the graph and the algorithm's input: a source collection
    for 2S/SUB2/SUB4, pairs for 2P/4P, nothing for 4AP/8AP. ``transform(G)``
    returns the spanner as a :class:`Graph`.
    """

    def __init__(self, algorithm: str = "2S", c: float = 3.0, seed: int = 0,
                 bandwidth_multiplier: int = 4, max_rounds: Optional[int] = None,
                 fallbacks: bool = True):
        self.algorithm = algorithm
        self.c = c
        self.seed = seed
        self.bandwidth_multiplier = bandwidth_multiplier
        self.max_rounds = max_rounds
        self.fallbacks = fallbacks

    def _config(self) -> AlgoConfig:
        return AlgoConfig(normalize_algorithm(self.algorithm), c=self.c, seed=self.seed,
                          bandwidth_multiplier=self.bandwidth_multiplier,
                          max_rounds=self.max_rounds, fallbacks=self.fallbacks)

    def _check_input(self, y, n: int):
        kind = INPUT_KIND[normalize_algorithm(self.algorithm)]
        if kind is None:
            if y is not None:
                raise GraphError(f"{self.algorithm} takes no source or pair input")
            return None
        if y is None:
            raise GraphError(f"{self.algorithm} needs {kind}")
        return check_pairs(y, n) if kind == "pairs" else check_sources(y, n)

    def fit(self, G, y=None):
        g = check_graph(G)
        inp = self._check_input(y, g.node_count)
        result = build_spanner(g, inp, self._config())
        self.result_ = result
        self.input_ = inp
        self.n_nodes_ = g.node_count
        self.edges_ = result.h_edges
        self.n_rounds_ = result.stats.rounds
        return self

    def _fitted(self):
        if not hasattr(self, "result_"):
            raise NotFittedError("call fit before using this AdditiveSpanner")

    def transform(self, G) -> Graph:
        self._fitted()
        g = check_graph(G)
        if g.node_count != self.n_nodes_:
            raise GraphError("transform graph differs from the fitted one")
        return self.result_.to_graph(g)

    def stretch_report(self, G) -> StretchReport:
        """Exact stretch check of the fitted spanner on its required pairs."""
        self._fitted()
        g = check_graph(G)
        pairs = required_pairs(self.result_.config.algorithm, self.input_)
        return verify_stretch(g, self.edges_, pairs, 1, self.result_.stretch)

    def score(self, G, y=None) -> float:
        """Fraction of required pairs within the additive bound."""
        report = self.stretch_report(G)
        if report.checked_pairs == 0:
            return 1.0
        return 1.0 - len(report.violations) / report.checked_pairs

