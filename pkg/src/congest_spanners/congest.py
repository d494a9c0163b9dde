"""Round-accurate synchronous CONGEST executor.

A node program only sees its own id, its neighbor ids, its local input, a
private RNG stream and the messages delivered to it. Messages produced in
round ``t`` (``init`` counts as round 0) are delivered in round ``t + 1``.
Halting follows vote-to-halt semantics: a halted node is woken up by an
incoming message, and the run ends once every node is halted with nothing
in flight.
"""

from __future__ import annotations

import csv
import logging
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np

from .graph import Graph, diameter

log = logging.getLogger(__name__)

DEFAULT_BANDWIDTH_MULTIPLIER = 4
DEFAULT_ROUNDS_FACTOR = 64

_EMPTY: Mapping[int, "Message"] = {}
_UNSET = object()


def word_bits(n: int) -> int:
    """Bits in one machine word, ``ceil(log2 n)`` (at least 1)."""
    return max(1, (n - 1).bit_length())


def value_bits(value: Any) -> int:
    """Encoded size of a non-negative int, bool, or tuple thereof."""
    if isinstance(value, tuple):
        return sum(value_bits(v) for v in value)
    return max(1, int(value).bit_length())


class CongestError(RuntimeError):
    pass


class BandwidthExceeded(CongestError):
    def __init__(self, node: int, round_no: int, bits: int, bandwidth: int):
        super().__init__(f"node {node} sent a {bits}-bit message in round {round_no} "
                         f"(bandwidth {bandwidth} bits)")
        self.node = node
        self.round = round_no
        self.bits = bits
        self.bandwidth = bandwidth


class SimulationTimeout(CongestError):
    def __init__(self, max_rounds: int, stats: "RoundStats"):
        super().__init__(f"simulation exceeded {max_rounds} rounds")
        self.stats = stats


class Message:
    """Immutable payload of non-negative ints, each with a declared bit width."""

    __slots__ = ("payload", "bits")

    def __init__(self, payload: tuple, widths: Sequence[int]):
        if len(payload) != len(widths):
            raise ValueError("payload and widths differ in length")
        for value, width in zip(payload, widths):
            if value < 0 or value >> width:
                raise ValueError(f"value {value} does not fit in {width} bits")
        self.payload = payload
        self.bits = sum(widths)

    def __repr__(self) -> str:
        return f"Message({self.payload}, bits={self.bits})"


@dataclass(frozen=True)
class SimConfig:
    bandwidth_multiplier: int = DEFAULT_BANDWIDTH_MULTIPLIER
    max_rounds: Optional[int] = None  # None: 64 * (n + D)
    seed: int = 0
    trace: bool = False

    def __post_init__(self):
        if self.bandwidth_multiplier < 1:
            raise ValueError("bandwidth_multiplier must be >= 1")
        if self.max_rounds is not None and self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")

    def bandwidth(self, n: int) -> int:
        return self.bandwidth_multiplier * word_bits(n)

    def round_limit(self, g: Graph) -> int:
        if self.max_rounds is not None:
            return self.max_rounds
        d = diameter(g) if g.is_connected() else g.node_count
        return DEFAULT_ROUNDS_FACTOR * (g.node_count + d)


@dataclass
class RoundStats:
    rounds: int = 0
    messages_sent: int = 0
    total_bits: int = 0
    max_message_bits: int = 0
    bandwidth: int = 0
    phases: list[tuple[str, int]] = field(default_factory=list)
    # directed (src, dst) -> bits, and (round, src, dst, bits) records; tracing only
    edge_bits: Optional[dict[tuple[int, int], int]] = None
    trace: Optional[list[tuple[int, int, int, int]]] = None

    def absorb(self, other: "RoundStats", phase: str) -> None:
        """Append a later phase: its rounds follow ours."""
        offset = self.rounds
        self.rounds += other.rounds
        self.messages_sent += other.messages_sent
        self.total_bits += other.total_bits
        self.max_message_bits = max(self.max_message_bits, other.max_message_bits)
        self.bandwidth = max(self.bandwidth, other.bandwidth)
        self.phases.append((phase, other.rounds))
        if other.trace is not None:
            if self.trace is None:
                self.trace, self.edge_bits = [], {}
            self.trace.extend((r + offset, s, d, b) for r, s, d, b in other.trace)
            for key, bits in other.edge_bits.items():
                self.edge_bits[key] = self.edge_bits.get(key, 0) + bits

    def as_dict(self) -> dict:
        return {"rounds": self.rounds, "messages_sent": self.messages_sent,
                "total_bits": self.total_bits, "max_message_bits": self.max_message_bits,
                "bandwidth": self.bandwidth, "phases": [list(p) for p in self.phases]}


class NodeContext:
    """Everything a node may touch. There is deliberately no handle on the graph."""

    __slots__ = ("node_id", "neighbors", "input", "output", "_seed", "_rng", "_out", "_bcast",
                 "_halted")

    def __init__(self, node_id: int, neighbors: tuple[int, ...], local_input: Any, seed: tuple):
        self.node_id = node_id
        self.neighbors = neighbors
        self.input = local_input
        self.output = None
        self._seed = seed
        self._rng: Optional[np.random.Generator] = None
        self._out: dict[int, Message] = {}
        self._bcast: Optional[tuple[Message, Any]] = None
        self._halted = False

    @property
    def rng(self) -> np.random.Generator:
        if self._rng is None:
            self._rng = np.random.default_rng(self._seed)
        return self._rng

    def send(self, neighbor: int, msg: Message) -> None:
        if self._bcast is not None:
            self._flush_broadcast()
        if neighbor in self._out:
            raise CongestError(f"node {self.node_id} sent twice to {neighbor} in one round")
        self._out[neighbor] = msg

    def broadcast(self, msg: Message, exclude=()) -> None:
        """Send ``msg`` to every neighbor not in ``exclude``."""
        if self._bcast is not None:
            self._flush_broadcast()
        self._bcast = (msg, exclude)
        if self._out:
            self._flush_broadcast()

    def _flush_broadcast(self) -> None:
        # fan a pending broadcast out into per-neighbor sends, checking for clashes
        msg, exclude = self._bcast
        self._bcast = None
        for u in self.neighbors:
            if u not in exclude:
                self.send(u, msg)

    def halt(self, output: Any = _UNSET) -> None:
        if output is not _UNSET:
            self.output = output
        self._halted = True


class NodeProgram:
    """Per-node behaviour; one instance is created for every node."""

    def init(self, ctx: NodeContext) -> None:
        pass

    def step(self, ctx: NodeContext, round_no: int, inbox: Mapping[int, Message]) -> None:
        ctx.halt()


def run_simulation(g: Graph, program: Callable[[], NodeProgram],
                   inputs: Optional[Sequence[Any]] = None, cfg: SimConfig = SimConfig(),
                   *, stream: int = 0) -> tuple[list[Any], RoundStats]:
    """Run ``program`` on every node of ``g`` until global quiescence.

    ``stream`` separates the private RNG streams of different runs under the
    same master seed; node ``v`` draws from ``default_rng((seed, stream, v))``.
    """
    n = g.node_count
    bandwidth = cfg.bandwidth(n)
    limit = cfg.round_limit(g)
    stats = RoundStats(bandwidth=bandwidth)
    if cfg.trace:
        stats.trace, stats.edge_bits = [], {}
    ctxs = [NodeContext(v, g.neighbors(v), None if inputs is None else inputs[v],
                        (cfg.seed, stream, v)) for v in range(n)]
    progs = [program() for _ in range(n)]
    nbr_sets = [g.neighbor_set(v) for v in range(n)]
    adjacency = g.adjacency

    def deliver(senders, round_no) -> list[Optional[dict]]:
        inbox: list[Optional[dict]] = [None] * n
        sent = bits_total = 0
        max_bits = stats.max_message_bits
        tr = stats.trace
        for v in senders:
            ctx = ctxs[v]
            if ctx._bcast is not None:
                msg, exclude = ctx._bcast
                ctx._bcast = None
                b = msg.bits
                if b > bandwidth:
                    raise BandwidthExceeded(v, round_no, b, bandwidth)
                if b > max_bits:
                    max_bits = b
                count = 0
                for dst in adjacency[v]:
                    if dst in exclude:
                        continue
                    count += 1
                    box = inbox[dst]
                    if box is None:
                        inbox[dst] = {v: msg}
                    else:
                        box[v] = msg
                    if tr is not None:
                        tr.append((round_no, v, dst, b))
                        stats.edge_bits[(v, dst)] = stats.edge_bits.get((v, dst), 0) + b
                sent += count
                bits_total += count * b
            out = ctx._out
            if not out:
                continue
            ok = nbr_sets[v]
            for dst, msg in out.items():
                b = msg.bits
                if b > bandwidth:
                    raise BandwidthExceeded(v, round_no, b, bandwidth)
                if dst not in ok:
                    raise CongestError(f"node {v} sent to non-neighbor {dst}")
                bits_total += b
                if b > max_bits:
                    max_bits = b
                box = inbox[dst]
                if box is None:
                    inbox[dst] = {v: msg}
                else:
                    box[v] = msg
                if tr is not None:
                    tr.append((round_no, v, dst, b))
                    stats.edge_bits[(v, dst)] = stats.edge_bits.get((v, dst), 0) + b
            sent += len(out)
            ctx._out = {}
        stats.messages_sent += sent
        stats.total_bits += bits_total
        stats.max_message_bits = max_bits
        return inbox

    for v in range(n):
        progs[v].init(ctxs[v])
    awake = {v for v in range(n) if not ctxs[v]._halted}
    inbox = deliver(range(n), 0)
    round_no = 0
    while True:
        receivers = awake.union(v for v in range(n) if inbox[v] is not None) \
            if any(b is not None for b in inbox) else awake
        if not receivers:
            break
        round_no += 1
        if round_no > limit:
            stats.rounds = round_no - 1
            raise SimulationTimeout(limit, stats)
        order = sorted(receivers)
        for v in order:
            ctx = ctxs[v]
            ctx._halted = False
            box = inbox[v]
            progs[v].step(ctx, round_no, _EMPTY if box is None else box)
        awake = {v for v in order if not ctxs[v]._halted}
        inbox = deliver(order, round_no)
    stats.rounds = round_no
    stats.phases.append(("simulation", round_no))
    return [ctx.output for ctx in ctxs], stats


# --------------------------------------------------------------------------
# Gather along a BFS tree rooted at the minimum id, then spread back down.

_TOKEN, _ACK, _NACK, _UP, _DOWN = range(5)
_TAG_BITS = 3


def _tagged(tag: int, value: Any = None) -> Message:
    if value is None:
        return Message((tag,), (_TAG_BITS,))
    flat = value if isinstance(value, tuple) else (value,)
    return Message((tag,) + tuple(flat), (_TAG_BITS,) + tuple(value_bits(x) for x in flat))


def _untag(msg: Message, scalar: bool) -> Any:
    body = msg.payload[1:]
    return body[0] if scalar else tuple(body)


class _GatherSpread(NodeProgram):
    def init(self, ctx):
        self.value, self.combine, is_root = ctx.input
        self.scalar = not isinstance(self.value, tuple)
        self.parent = ctx.node_id if is_root else None
        self.children: set[int] = set()
        self.unclassified = set(ctx.neighbors)
        self.reported: set[int] = set()
        self.sent_up = False
        if is_root:
            if not ctx.neighbors:
                ctx.halt(self.value)
                return
            ctx.broadcast(_tagged(_TOKEN))

    def step(self, ctx, round_no, inbox):
        token_senders = [u for u, m in inbox.items() if m.payload[0] == _TOKEN]
        joined_now = False
        if self.parent is None and token_senders:
            joined_now = True
            self.parent = min(token_senders)
            ctx.send(self.parent, _tagged(_ACK))
            for u in token_senders:
                if u != self.parent:
                    ctx.send(u, _tagged(_NACK))
            ctx.broadcast(_tagged(_TOKEN), exclude=set(token_senders))
            self.unclassified.difference_update(token_senders)
        for u, m in inbox.items():
            tag = m.payload[0]
            if tag == _TOKEN or tag == _NACK:
                self.unclassified.discard(u)
            elif tag == _ACK:
                self.unclassified.discard(u)
                self.children.add(u)
            elif tag == _UP:
                self.value = self.combine(self.value, _untag(m, self.scalar))
                self.reported.add(u)
            elif tag == _DOWN:
                self._finish(ctx, _untag(m, self.scalar))
                return
        if (self.parent is not None and not self.unclassified and not self.sent_up
                and self.children <= self.reported):
            if joined_now:  # the edge to the parent already carries the ACK this round
                return
            self.sent_up = True
            if self.parent == ctx.node_id:
                self._finish(ctx, self.value)
                return
            ctx.send(self.parent, _tagged(_UP, self.value))
        ctx.halt()

    def _finish(self, ctx, result):
        for c in sorted(self.children):
            ctx.send(c, _tagged(_DOWN, result))
        ctx.halt(result)


def gather_and_spread(g: Graph, values: Sequence[Any], combine: Callable[[Any, Any], Any],
                      cfg: SimConfig = SimConfig(), *, stream: int = 0) -> tuple[list[Any], RoundStats]:
    """Combine one value per node over a BFS tree rooted at the minimum id and
    hand the combined result to every node. ``combine`` must be associative
    and commutative."""
    root = 0  # ids are dense, so node 0 knows it has the minimal identifier
    inputs = [(values[v], combine, v == root) for v in range(g.node_count)]
    return run_simulation(g, _GatherSpread, inputs, cfg, stream=stream)


def account_cut_bits(stats: RoundStats, partition: Union[Mapping[int, Any], Sequence[Any]]) -> int:
    """Bits carried by messages whose endpoints lie on different sides."""
    if stats.trace is None:
        raise ValueError("statistics carry no message trace; run with SimConfig(trace=True)")
    side = partition.__getitem__
    return sum(bits for (src, dst), bits in stats.edge_bits.items() if side(src) != side(dst))


def write_trace_csv(stats: RoundStats, path: Union[str, Path]) -> None:
    if stats.trace is None:
        raise ValueError("statistics carry no message trace")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["round", "src", "dst", "bits"])
        writer.writerows(stats.trace)
