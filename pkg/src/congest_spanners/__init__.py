"""Purely additive spanners built by simulated CONGEST algorithms, with exact
verification and the lower-bound reduction harness."""

from .congest import (
    BandwidthExceeded, CongestError, Message, NodeContext, NodeProgram, RoundStats, SimConfig,
    SimulationTimeout, account_cut_bits, gather_and_spread, run_simulation,
)
from .estimator import AdditiveSpanner, check_graph, check_pairs, check_sources
from .graph import (
    BfsTree, DisconnectedGraphError, Graph, GraphError, PairSet, bfs, build_general_lowerbound_graph,
    build_lowerbound_graph, build_projective_incidence, diameter, distance_matrix, gen_gnp, girth,
    load_graph, load_pairs, load_sources, save_graph,
)
from .spanners import AlgoConfig, SpannerResult, build_spanner
from .verify import (
    SizeReport, SourceCross, StretchReport, round_report, size_report, verify_stretch,
    verify_subgraph,
)

__version__ = "0.1.0"

__all__ = [
    "AdditiveSpanner", "AlgoConfig", "BandwidthExceeded", "BfsTree", "CongestError",
    "DisconnectedGraphError", "Graph", "GraphError", "Message", "NodeContext", "NodeProgram",
    "PairSet", "RoundStats", "SimConfig", "SimulationTimeout", "SizeReport", "SourceCross",
    "SpannerResult", "StretchReport", "account_cut_bits", "bfs", "build_general_lowerbound_graph",
    "build_lowerbound_graph", "build_projective_incidence", "build_spanner", "check_graph",
    "check_pairs", "check_sources", "diameter", "distance_matrix", "gather_and_spread", "gen_gnp",
    "girth", "load_graph", "load_pairs", "load_sources", "round_report", "run_simulation",
    "save_graph", "size_report", "verify_stretch", "verify_subgraph",
]
