"""Algorithm configuration and the derived sampling parameters.

All logarithms are natural. Probabilities are clamped to [0, 1]; a degenerate
denominator (``h = 0`` or ``ln n = 0``) means "always".
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

from ..congest import DEFAULT_BANDWIDTH_MULTIPLIER, SimConfig

ALGORITHMS = ("2S", "2P", "4P", "4AP", "8AP", "SUB2", "SUB4")
STRETCH = {"2S": 2, "2P": 2, "4P": 4, "4AP": 4, "8AP": 8, "SUB2": 2, "SUB4": 4}
INPUT_KIND = {"2S": "sources", "SUB2": "sources", "SUB4": "sources",
              "2P": "pairs", "4P": "pairs", "4AP": None, "8AP": None}
LOG_BASE = "e"

# RNG stream tags, so different coins of one node are independent
STREAM_GATHER, STREAM_CENTERS, STREAM_ROOTS, STREAM_SET_A = 1, 2, 3, 4


def clamp01(x: float) -> float:
    if math.isnan(x):
        return 1.0
    return min(1.0, max(0.0, x))


def _ratio(num: float, den: float) -> float:
    return math.inf if den <= 0 else num / den


def normalize_algorithm(name: str) -> str:
    key = name.upper()
    if key not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {name!r}; expected one of {', '.join(ALGORITHMS)}")
    return key


def compute_h(algorithm: str, n: int, sources: int = 0, pairs: int = 0) -> float:
    """The cluster-size parameter h of each algorithm's initialization."""
    ln = math.log(n) if n > 1 else 0.0
    algorithm = normalize_algorithm(algorithm)
    if algorithm == "2S":
        return (n * sources) ** 0.25 * ln ** 0.75
    if algorithm == "4AP":
        return n ** 0.4 * ln ** 0.8
    if algorithm == "2P":
        return pairs ** (1 / 3) * ln ** (2 / 3)
    if algorithm == "4P":
        return pairs ** (2 / 7) * ln ** (6 / 7)
    if algorithm == "8AP":
        return n ** (4 / 11) * ln ** (10 / 11)
    raise ValueError(f"{algorithm} delegates to another algorithm and has no h of its own")


def compute_ell(n: int, h: float) -> float:
    """Prefix/suffix length ``n ln^3 n / h^(5/2)`` used by 4P and 8AP."""
    ln = math.log(n) if n > 1 else 0.0
    return _ratio(n * ln ** 3, h ** 2.5)


@dataclass(frozen=True)
class AlgoConfig:
    algorithm: str
    c: float = 3.0
    seed: int = 0
    bandwidth_multiplier: int = DEFAULT_BANDWIDTH_MULTIPLIER
    max_rounds: Optional[int] = None
    trace: bool = False
    fallbacks: bool = True
    # explicit overrides, mostly for tests; None derives from the formulas
    h: Optional[float] = None
    ell: Optional[float] = None
    center_prob: Optional[float] = None
    root_prob: Optional[float] = None
    a_prob: Optional[float] = None
    threshold: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "algorithm", normalize_algorithm(self.algorithm))
        if self.c <= 0:
            raise ValueError("c must be positive")

    def with_algorithm(self, algorithm: str) -> "AlgoConfig":
        return replace(self, algorithm=algorithm)


@dataclass(frozen=True)
class Params:
    """Fully resolved per-run quantities that every node learns after preprocessing."""

    n: int
    c: float
    h: float
    center_prob: float
    root_prob: float
    threshold: float
    ell: float = 0.0
    a_prob: float = 0.0
    seed: int = 0
    sim: SimConfig = field(default_factory=SimConfig)

    @property
    def ell_edges(self) -> int:
        """Edges bought at each end of a path: ``ceil(ell)``, capped at ``n - 1``."""
        cap = max(0, self.n - 1)
        if math.isinf(self.ell):
            return cap
        return min(cap, math.ceil(self.ell))


def resolve(cfg: AlgoConfig, n: int, h: float, sim: SimConfig,
            with_ell: bool = False) -> Params:
    """Derive probabilities and the path-buying threshold for a given ``h``."""
    ln = math.log(n) if n > 1 else 0.0
    c = cfg.c
    h = cfg.h if cfg.h is not None else h
    center_prob = cfg.center_prob if cfg.center_prob is not None else clamp01(_ratio(c * ln, h))
    root_prob = cfg.root_prob if cfg.root_prob is not None else clamp01(_ratio(h * h, c * n * ln))
    threshold = cfg.threshold if cfg.threshold is not None else _ratio(2 * c * c * n * ln * ln, h * h)
    ell = a_prob = 0.0
    if with_ell:
        ell = cfg.ell if cfg.ell is not None else compute_ell(n, h)
        a_prob = cfg.a_prob if cfg.a_prob is not None else clamp01(_ratio(16 * c * ln, ell))
    return Params(n=n, c=c, h=h, center_prob=center_prob, root_prob=root_prob,
                  threshold=threshold, ell=ell, a_prob=a_prob, seed=cfg.seed, sim=sim)
