"""Node programs used by the spanner constructions.

Each program keeps its state in instance attributes and reads only its
``NodeContext``. Inputs are plain tuples handed out by the phase drivers.
"""

from __future__ import annotations

import heapq
from typing import Optional

from ..congest import Message, NodeProgram

_ONE_BIT = Message((1,), (1,))


class MultiSourceBfs(NodeProgram):
    """BFS from many roots at once, one token per edge per round.

    A token is ``(root, dist, missing)`` where ``missing`` counts path edges
    absent from the reference subgraph. Every round a node forwards the pending
    token with the smallest ``(dist, root)``. It skips neighbors that already
    announced that root at distance at most ``dist + 1``, since they cannot
    improve from it.

    Input: ``(is_root, reference_neighbors or None, word_bits)``.
    Output: dict ``root -> [dist, parent, missing, arrival_round]``; the root
    itself maps to ``[0, self, 0, 0]``. ``missing`` is 0 when there is no
    reference.
    """

    def init(self, ctx):
        is_root, self.ref, wb = ctx.input
        self.widths = (wb, wb, wb)
        # root -> [dist, parent, missing, arrival_round, {neighbor: its dist} until forwarded]
        self.best: dict[int, list] = {}
        self.sent: dict[int, int] = {}
        self.queue: list[tuple[int, int]] = []
        ctx.output = self.best
        if is_root:
            me = ctx.node_id
            self.best[me] = [0, me, 0, 0, None]
            self.queue.append((0, me))
        self._forward(ctx)

    def step(self, ctx, round_no, inbox):
        best, ref, queue = self.best, self.ref, self.queue
        get = best.get
        for src, msg in inbox.items():  # ascending sender id, so the first wins ties
            root, d, miss = msg.payload
            cur = get(root)
            if cur is not None and d + 1 >= cur[0]:
                seen = cur[4]
                if seen is not None:
                    seen[src] = d
                continue
            if ref is not None and src not in ref:
                miss += 1
            best[root] = [d + 1, src, miss, round_no, {src: d}]
            heapq.heappush(queue, (d + 1, root))
        self._forward(ctx)

    def _forward(self, ctx):
        queue, best, sent = self.queue, self.best, self.sent
        while queue:
            d, root = heapq.heappop(queue)
            cur = best[root]
            if cur[0] != d or sent.get(root, d + 1) <= d:
                continue
            sent[root] = d
            seen = cur[4]
            cur[4] = None
            skip = {u for u, du in seen.items() if du <= d + 1} if seen else ()
            ctx.broadcast(Message((root, d, cur[2]), self.widths), exclude=skip)
            break
        if not queue:
            ctx.halt()


class EdgeNotice(NodeProgram):
    """Tell chosen neighbors that the connecting edge is now in the spanner.

    Input: set of neighbors to notify. Output: set of neighbors whose edge to
    this node was added by either endpoint.
    """

    def init(self, ctx):
        targets = ctx.input or ()
        self.edges = set(targets)
        ctx.output = self.edges
        for u in targets:
            ctx.send(u, _ONE_BIT)

    def step(self, ctx, round_no, inbox):
        self.edges.update(inbox)
        ctx.halt()


CLUSTER_JOIN, CLUSTER_OPEN = 0, 1


class Clustering(NodeProgram):
    """Sample centers and form clusters from their neighborhoods.

    Round 0: centers announce themselves. Round 1: a non-center next to a center
    joins the smallest such center, otherwise it adds every incident edge.
    Round 2: centers record their members and everyone records edges added by
    neighbors. A center always belongs to its own cluster.

    Input: ``center_probability``. Output: ``(is_center, center or None,
    members, added)`` where ``added`` maps neighbor -> kind of the added edge.
    """

    def init(self, ctx):
        p = ctx.input
        self.is_center = bool(ctx.rng.random() < p)
        self.center: Optional[int] = ctx.node_id if self.is_center else None
        self.members: set[int] = set()
        self.added: dict[int, int] = {}
        if self.is_center:
            ctx.broadcast(_ONE_BIT)

    def step(self, ctx, round_no, inbox):
        if round_no == 1:
            if self.is_center:
                pass
            elif inbox:
                self.center = min(inbox)
                self.added[self.center] = CLUSTER_JOIN
                ctx.send(self.center, Message((CLUSTER_JOIN,), (1,)))
            elif ctx.neighbors:
                for u in ctx.neighbors:
                    self.added[u] = CLUSTER_OPEN
                ctx.broadcast(Message((CLUSTER_OPEN,), (1,)))
        else:
            for u, msg in inbox.items():
                kind = msg.payload[0]
                if kind == CLUSTER_JOIN:
                    self.members.add(u)
                self.added.setdefault(u, kind)
        ctx.halt((self.is_center, self.center, self.members, self.added))


class ClusterReport(NodeProgram):
    """Members stream their BFS entries to the center; the center picks, per root,
    the member with the shortest path among those whose path misses at most
    ``threshold`` spanner edges, and tells that member. A center is a member of
    its own cluster and handles its own entries without sending.

    Input: ``(center or None, entries, members, chooses, threshold, word_bits)``
    where ``entries`` is a list of ``(root, dist, missing)`` and ``chooses``
    says whether this node selects for its own cluster.
    Output: set of roots this node must buy a path to.
    """

    def init(self, ctx):
        center, entries, members, chooses, self.threshold, wb = ctx.input
        me = ctx.node_id
        self.wb = wb
        self.best: dict[int, tuple[int, int]] = {}
        self.replies: dict[int, list[int]] = {}
        self.buy: set[int] = set()
        ctx.output = self.buy
        self.waiting = set(members) - {me} if chooses else set()
        if center == me:
            if chooses:
                for root, dist, miss in entries:
                    self._offer(root, dist, miss, me)
            center, entries = None, []
        self.center = center
        self.entries = entries
        self.pos = 0
        if chooses and not self.waiting:
            self._decide(me)
        self._act(ctx)

    def _offer(self, root, dist, miss, member):
        if miss <= self.threshold:
            cur = self.best.get(root)
            if cur is None or (dist, member) < cur:
                self.best[root] = (dist, member)

    def _decide(self, me):
        for root in sorted(self.best):
            member = self.best[root][1]
            if member == me:
                self.buy.add(root)
            else:
                self.replies.setdefault(member, []).append(root)
        for queue in self.replies.values():
            queue.reverse()

    def step(self, ctx, round_no, inbox):
        for src, msg in inbox.items():
            if src == self.center and len(msg.payload) == 2:
                self.buy.add(msg.payload[0])
                continue
            root, dist, miss, last = msg.payload
            self._offer(root, dist, miss, src)
            if last and src in self.waiting:
                self.waiting.discard(src)
                if not self.waiting:
                    self._decide(ctx.node_id)
        self._act(ctx)

    def _act(self, ctx):
        wb = self.wb
        if self.center is not None and self.pos < len(self.entries):
            root, dist, miss = self.entries[self.pos]
            self.pos += 1
            last = int(self.pos == len(self.entries))
            ctx.send(self.center, Message((root, dist, miss, last), (wb, wb, wb, 1)))
        if not self.waiting:
            for member in list(self.replies):
                queue = self.replies[member]
                ctx.send(member, Message((queue.pop(), 1), (wb, 1)))
                if not queue:
                    del self.replies[member]
        more = self.center is not None and self.pos < len(self.entries)
        if not more and not self.replies:
            ctx.halt()


class Rollback(NodeProgram):
    """Walk BFS trees backwards, buying missing edges toward the roots.

    The forward BFS schedule is replayed in reverse: a node handles root ``r``
    in round ``R - arrival_round(r)``, so everything its children send for
    ``r`` has arrived by then. A message ``(root, counter, bought)`` goes from
    child to parent; ``bought`` lets the parent record the edge.

    Two modes:

    * plain (``ell < 0``): roots in ``start`` need a path; every missing edge
      on the way up is bought.
    * prefix/suffix (``ell >= 0``): roots in ``start`` are pair partners. The
      counter says how many more missing edges to buy near the lower end; it
      starts at ``ell`` and is decremented per purchase. Independently, every
      missing edge among the first ``ell`` missing edges from the root is bought.

    Passing up stops as soon as nothing above is missing.

    Input: ``(R, table, ref, start, ell, word_bits)`` where ``table`` is the
    forward BFS output of this node. Output: set of neighbors whose edge was bought.
    """

    def init(self, ctx):
        self.R, self.table, self.ref, start, self.ell, wb = ctx.input
        self.widths = (wb, wb, 1)
        self.need: dict[int, int] = {}
        self.pending: list[tuple[int, int]] = []
        self.bought: set[int] = set()
        ctx.output = self.bought
        boost = max(self.ell, 0)
        for root in start:
            self._mark(root, boost)
        self._act(ctx, 0)

    def _mark(self, root: int, counter: int) -> None:
        entry = self.table.get(root)
        if entry is None or entry[0] == 0:
            return
        if root not in self.need:
            self.need[root] = counter
            heapq.heappush(self.pending, (self.R - entry[3], root))
        elif counter > self.need[root]:
            self.need[root] = counter

    def step(self, ctx, round_no, inbox):
        for src, msg in inbox.items():
            root, counter, bought = msg.payload
            if bought:
                self.bought.add(src)
            self._mark(root, counter)
        self._act(ctx, round_no)

    def _act(self, ctx, round_no):
        pending = self.pending
        while pending and pending[0][0] <= round_no:
            slot, root = heapq.heappop(pending)
            if slot < round_no:
                raise AssertionError("rollback slot missed")
            _, parent, miss = self.table[root][:3]
            counter = self.need.pop(root)
            missing_here = parent not in self.ref
            buy = False
            if missing_here:
                if self.ell < 0:
                    buy = True
                elif counter > 0:
                    buy = True
                    counter -= 1
                elif miss <= self.ell:
                    buy = True
            if buy:
                self.bought.add(parent)
            above = miss - int(missing_here)
            if above > 0 or buy:
                ctx.send(parent, Message((root, counter if above > 0 else 0, int(buy)), self.widths))
        if not pending:
            ctx.halt()
