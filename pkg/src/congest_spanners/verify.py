"""Ground-truth checks of spanner outputs: subgraph validity, additive stretch
against exact distances, and edge/round counts against the asymptotic bounds."""

from __future__ import annotations

import math
from collections.abc import Iterable
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .congest import RoundStats
from .graph import Edge, Graph, PairSet, distances_from

SAMPLE_ABOVE = 5000  # "all" pairs on larger graphs are checked on a sample
DEFAULT_SAMPLE_PAIRS = 20000


@dataclass(frozen=True)
class SourceCross:
    """The pair set S x V."""

    sources: frozenset

    def __init__(self, sources: Iterable[int]):
        object.__setattr__(self, "sources", frozenset(int(s) for s in sources))


PairSpec = Union[PairSet, SourceCross, str, Iterable[tuple[int, int]]]


@dataclass
class StretchReport:
    checked_pairs: int
    max_additive_excess: float  # an int unless some pair is disconnected in H
    violations: list = field(default_factory=list)  # (u, v, dist_G, dist_H)
    bound_beta: int = 0
    alpha: float = 1.0
    sampled: bool = False

    @property
    def ok(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class SizeReport:
    edge_count: int
    bound_formula_value: float
    ratio: float


@dataclass(frozen=True)
class RoundReport:
    rounds: int
    bound_argument: float
    ratio: float


def verify_subgraph(g: Graph, h_edges: Iterable[Edge]) -> bool:
    return all(g.has_edge(u, v) for u, v in h_edges)


def _pair_rows(g: Graph, pairs: PairSpec, sample: Optional[int], seed: int
               ) -> tuple[dict[int, np.ndarray], bool]:
    """Map each BFS source to the array of targets it is paired with."""
    n = g.node_count
    if isinstance(pairs, str):
        if pairs != "all":
            raise ValueError(f"unknown pair specification {pairs!r}")
        if sample is None and n > SAMPLE_ABOVE:
            sample = DEFAULT_SAMPLE_PAIRS
        if sample is not None:
            rng = np.random.default_rng(seed)
            us = rng.integers(0, n, size=sample)
            vs = rng.integers(0, n, size=sample)
            rows: dict[int, list] = {}
            for u, v in zip(us.tolist(), vs.tolist()):
                if u != v:
                    rows.setdefault(u, []).append(v)
            return {u: np.array(sorted(set(vs_))) for u, vs_ in rows.items()}, True
        everyone = np.arange(n)
        return {u: everyone[u + 1:] for u in range(n - 1)}, False
    if isinstance(pairs, SourceCross):
        everyone = np.arange(n)
        return {s: everyone[everyone != s] for s in sorted(pairs.sources)}, False
    rows = {}
    for u, v in (pairs.pairs if isinstance(pairs, PairSet) else pairs):
        u, v = (u, v) if u < v else (v, u)
        rows.setdefault(u, []).append(v)
    return {u: np.array(sorted(set(vs_))) for u, vs_ in sorted(rows.items())}, False


def verify_stretch(g: Graph, h_edges: Iterable[Edge], pairs: PairSpec = "all",
                   alpha: float = 1.0, beta: int = 0, *, sample: Optional[int] = None,
                   seed: int = 0) -> StretchReport:
    """Check ``dist_H(u, v) <= alpha * dist_G(u, v) + beta`` for every requested pair.

    Distances come from one BFS per distinct source in G and in H. A pair that
    is connected in G but not in H is always a violation.
    """
    h = g.subgraph(h_edges)
    rows, sampled = _pair_rows(g, pairs, sample, seed)
    report = StretchReport(checked_pairs=0, max_additive_excess=0, bound_beta=beta,
                           alpha=alpha, sampled=sampled)
    sources = [u for u, targets in rows.items() if len(targets)]
    if not sources:
        return report
    dg_all = distances_from(g, sources)
    dh_all = distances_from(h, sources)
    worst = -math.inf
    for i, u in enumerate(sources):
        targets = rows[u]
        dg = dg_all[i, targets]
        dh = dh_all[i, targets]
        finite = np.isfinite(dg)
        report.checked_pairs += int(finite.sum())
        dg, dh, tg = dg[finite], dh[finite], targets[finite]
        if len(dg) == 0:
            continue
        worst = max(worst, float(np.max(dh - dg)))
        bad = np.nonzero(dh > alpha * dg + beta)[0]
        for k in bad.tolist():
            dist_h = float(dh[k]) if math.isinf(dh[k]) else int(dh[k])
            report.violations.append((u, int(tg[k]), int(dg[k]), dist_h))
    if worst > -math.inf:
        report.max_additive_excess = worst if math.isinf(worst) else int(worst)
    return report


def _ln(n: int) -> float:
    return math.log(n) if n > 1 else 0.0


def size_bound(algorithm: str, n: int, sources: int = 0, pairs: int = 0) -> float:
    """Edge-count bound of each construction, without its hidden constant."""
    ln = _ln(n)
    algorithm = algorithm.upper()
    if algorithm == "2S":
        return n ** 1.25 * sources ** 0.25 * ln ** 0.75
    if algorithm == "2P":
        return n * pairs ** (1 / 3) * ln ** (2 / 3)
    if algorithm == "4P":
        return n * pairs ** (2 / 7) * ln ** (6 / 7)
    if algorithm == "4AP":
        return n ** 1.4 * ln ** 0.8
    if algorithm == "8AP":
        return n ** (15 / 11) * ln ** (10 / 11)
    if algorithm == "SUB2":
        return n * sources ** (2 / 3) * ln ** (2 / 3)
    if algorithm == "SUB4":
        return n * sources ** (4 / 7) * ln ** (6 / 7)
    raise ValueError(f"unknown algorithm {algorithm!r}")


def round_argument(algorithm: str, param: int, diameter: int, n: int = 0) -> float:
    """The expression inside the O(.) of each construction's round bound.

    ``param`` is |S| for source inputs and tau(P) for pair inputs; it is
    ignored by the all-pairs constructions.
    """
    algorithm = algorithm.upper()
    if algorithm in ("2S", "2P", "4P", "SUB2", "SUB4"):
        return param + diameter
    ln = _ln(n)
    if algorithm == "4AP":
        return n ** 0.6 * ln ** 0.2 + diameter
    if algorithm == "8AP":
        return n ** (7 / 11) * ln ** (1 / 11) + diameter
    raise ValueError(f"unknown algorithm {algorithm!r}")


def _ratio(value: float, bound: float) -> float:
    if value == 0:
        return 0.0
    return math.inf if bound <= 0 else value / bound


def size_report(result, n: int, sources: int = 0, pairs: int = 0,
                algorithm: Optional[str] = None) -> SizeReport:
    """Compare a spanner result (or a bare edge count plus ``algorithm``) with
    its size bound."""
    if isinstance(result, int):
        edges = result
        if algorithm is None:
            raise ValueError("an algorithm is needed when passing a bare edge count")
    else:
        edges = len(result.h_edges)
        algorithm = algorithm or result.config.algorithm
    bound = size_bound(algorithm, n, sources=sources, pairs=pairs)
    return SizeReport(edges, bound, _ratio(edges, bound))


def round_report(stats: Union[RoundStats, int], algorithm: str, param: int, diameter: int,
                 n: int = 0) -> RoundReport:
    rounds = stats if isinstance(stats, int) else stats.rounds
    arg = round_argument(algorithm, param, diameter, n)
    return RoundReport(rounds, arg, _ratio(rounds, arg))


def required_pairs(algorithm: str, inp) -> PairSpec:
    """The pairs whose stretch an algorithm guarantees: S x V for 2S, S x S for
    the subsetwise variants, the given pairs for 2P/4P, all pairs otherwise."""
    algorithm = algorithm.upper()
    if inp is None:
        return "all"
    if isinstance(inp, PairSet):
        return inp
    if algorithm == "2S":
        return SourceCross(inp)
    return PairSet.product(inp)


def input_param(algorithm: str, inp) -> int:
    """The size parameter of an input: |S| for source sets, tau(P) for pair sets."""
    if inp is None:
        return 0
    if isinstance(inp, PairSet):
        return inp.tau
    return len(inp)


CSV_FIELDS = ("algo", "n", "D", "param", "edges", "ratio_size", "rounds", "ratio_rounds",
              "max_excess", "violations")


def csv_row(algorithm: str, n: int, diameter: int, param: int, size: SizeReport,
            rounds: RoundReport, stretch: StretchReport) -> list:
    return [algorithm.lower(), n, diameter, param, size.edge_count, f"{size.ratio:.6f}",
            rounds.rounds, f"{rounds.ratio:.6f}", stretch.max_additive_excess,
            len(stretch.violations)]
