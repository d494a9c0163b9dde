"""Distributed constructions of purely additive spanners."""

from .build import TAGS, InputKindError, SpannerResult, build_spanner
from .params import ALGORITHMS, STRETCH, AlgoConfig, Params, compute_ell, compute_h, resolve
from .phases import (
    BfsForest, ClusterState, add_bfs_trees, bfs_union, clustering_phase, multi_bfs,
    parallel_bfs_phase, path_buying_4p, path_buying_pairwise, path_buying_sourcewise,
    prefix_suffix_buying, select_bfs_roots, select_set_A,
)

__all__ = [
    "ALGORITHMS", "STRETCH", "TAGS", "AlgoConfig", "BfsForest", "ClusterState", "InputKindError",
    "Params", "SpannerResult", "add_bfs_trees", "bfs_union", "build_spanner", "clustering_phase",
    "compute_ell", "compute_h", "multi_bfs", "parallel_bfs_phase", "path_buying_4p",
    "path_buying_pairwise", "path_buying_sourcewise", "prefix_suffix_buying", "resolve",
    "select_bfs_roots", "select_set_A",
]
