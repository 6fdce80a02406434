"""Round-based synchronous message-passing simulator with per-edge budgets.

Each part aggregates over its induced subgraph plus its shortcut edges:
convergecast to the root of every shortcut component, exchange between
component roots along part edges, and broadcast back, all realized as one
convergecast/broadcast pass over a per-part overlay tree whose edges are the
shortcut component trees glued by deterministic part-internal linking edges.
Every message costs the same bit budget and edges serve queued messages in
(part, sequence) order, so congested edges serialize and round counts are
reproducible bit for bit.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Callable, Sequence

from .graph import AnnotatedGraph, RootedTree
from .shortcuts import Partition, Shortcut


class SimError(ValueError):
    pass


class RoundLimitExceeded(SimError):
    def __init__(self, message: str, stats: "RoundStats"):
        super().__init__(message)
        self.stats = stats


@dataclass(frozen=True)
class SimConfig:
    """Per-edge-per-direction bit budget and run limits.

    The default budget is 2*ceil(log2 n) + 64 bits (one vertex id plus one
    64-bit value); messages cost ceil(log2 n) + 64 bits each.
    """

    bits_per_edge_per_round: int | None = None
    max_rounds: int = 1_000_000
    seed: int = 0

    def budget(self, n: int) -> int:
        idbits = max(1, math.ceil(math.log2(max(2, n))))
        b = self.bits_per_edge_per_round
        if b is None:
            b = 2 * idbits + 64
        if b < idbits:
            raise SimError(f"budget {b} below one vertex id ({idbits} bits)")
        return b

    def message_bits(self, n: int) -> int:
        idbits = max(1, math.ceil(math.log2(max(2, n))))
        return idbits + 64


@dataclass
class RoundStats:
    rounds_used: int = 0
    messages_sent: int = 0
    max_edge_bits_any_round: int = 0

    def merged_with(self, other: "RoundStats") -> "RoundStats":
        return RoundStats(
            rounds_used=self.rounds_used + other.rounds_used,
            messages_sent=self.messages_sent + other.messages_sent,
            max_edge_bits_any_round=max(
                self.max_edge_bits_any_round, other.max_edge_bits_any_round
            ),
        )


_UP = 0
_DOWN = 1


@dataclass
class _PartProto:
    part_idx: int
    parent: dict[int, int | None]
    children: dict[int, list[int]]
    edge_of: dict[int, int]  # overlay vertex -> edge id toward parent
    pending: dict[int, int]
    acc: dict[int, object]
    result: dict[int, object]
    members: frozenset[int]
    op: str

    def combine(self, a, b):
        if a is None:
            return b
        if b is None:
            return a
        if self.op == "min":
            return a if a <= b else b
        if self.op == "max":
            return a if a >= b else b
        return a + b


class SimState:
    """Synchronous network state; ``run_round`` advances exactly one round."""

    def __init__(
        self,
        g: AnnotatedGraph,
        parts: Partition,
        shortcut: Shortcut,
        op: str,
        values: Sequence[object],
        cfg: SimConfig,
        trace: bool = False,
    ):
        if op not in ("min", "max", "sum"):
            raise SimError(f"unknown aggregate {op!r}")
        self.g = g
        self.cfg = cfg
        self.op = op
        self.budget = cfg.budget(g.n)
        self.msg_bits = cfg.message_bits(g.n)
        if self.msg_bits > self.budget:
            raise SimError("budget below one message")
        self.round = 0
        self.stats = RoundStats()
        self.trace: list[tuple[int, int, int, int]] | None = [] if trace else None
        # (eid, dir) -> deque of (earliest_round, part, seq, kind, head_vertex, payload)
        self.queues: dict[tuple[int, int], list] = {}
        self._seq = 0
        self.protos: list[_PartProto] = []
        for i, part in enumerate(parts.parts):
            self.protos.append(self._build_proto(i, part, shortcut.edge_sets[i], values))
        for proto in self.protos:
            for v in sorted(proto.parent):
                if proto.pending[v] == 0:
                    self._vertex_ready(proto, v, at_round=0)

    # -- overlay construction ------------------------------------------------

    def _build_proto(
        self, idx: int, part: frozenset[int], hedges: frozenset[tuple[int, int]], values
    ) -> _PartProto:
        g = self.g
        touched = set(part)
        for u, v in hedges:
            touched.add(u)
            touched.add(v)
        dsu = {v: v for v in touched}

        def find(a: int) -> int:
            while dsu[a] != a:
                dsu[a] = dsu[dsu[a]]
                a = dsu[a]
            return a

        for u, v in sorted(hedges):
            ru, rv = find(u), find(v)
            if ru != rv:
                dsu[max(ru, rv)] = min(ru, rv)
        comps: dict[int, set[int]] = {}
        for v in touched:
            comps.setdefault(find(v), set()).add(v)
        live = {r for r, cs in comps.items() if cs & part}
        # linking edges between components, through part-internal graph edges
        link: dict[tuple[int, int], int] = {}
        for v in sorted(part):
            for u, eid in g.adjacency[v]:
                if u in part and u > v:
                    ru, rv = find(u), find(v)
                    if ru != rv:
                        key = (min(ru, rv), max(ru, rv))
                        if key not in link or eid < link[key]:
                            link[key] = eid
        # BFS over components from the leader's component
        leader = min(part)
        root_comp = find(leader)
        comp_adj: dict[int, list[tuple[int, int]]] = {}
        for (ra, rb), eid in sorted(link.items(), key=lambda kv: kv[1]):
            comp_adj.setdefault(ra, []).append((rb, eid))
            comp_adj.setdefault(rb, []).append((ra, eid))
        chosen_links: list[int] = []
        seen_comp = {root_comp}
        dq = deque([root_comp])
        while dq:
            r = dq.popleft()
            for r2, eid in sorted(comp_adj.get(r, ()), key=lambda x: x[1]):
                if r2 not in seen_comp and r2 in live:
                    seen_comp.add(r2)
                    chosen_links.append(eid)
                    dq.append(r2)
        if live - seen_comp:
            raise SimError(f"part {idx} overlay disconnected; invalid shortcut or part")
        # vertex-level overlay tree
        adj: dict[int, list[tuple[int, int]]] = {}
        for u, v in sorted(hedges):
            if find(u) in live:
                eid = g.edge_id(u, v)
                adj.setdefault(u, []).append((v, eid))
                adj.setdefault(v, []).append((u, eid))
        for eid in chosen_links:
            u, v, _w = g.edges[eid]
            adj.setdefault(u, []).append((v, eid))
            adj.setdefault(v, []).append((u, eid))
        for v in part:
            adj.setdefault(v, [])
        parent: dict[int, int | None] = {leader: None}
        edge_of: dict[int, int] = {}
        order = [leader]
        dq = deque([leader])
        while dq:
            v = dq.popleft()
            for u, eid in sorted(adj.get(v, ())):
                if u not in parent:
                    parent[u] = v
                    edge_of[u] = eid
                    order.append(u)
                    dq.append(u)
        if not set(part) <= set(parent):
            raise SimError(f"part {idx} not spanned by its overlay; part disconnected?")
        children: dict[int, list[int]] = {v: [] for v in parent}
        for v, p in parent.items():
            if p is not None:
                children[p].append(v)
        for v in children:
            children[v].sort()
        pending = {v: len(children[v]) for v in parent}
        acc: dict[int, object] = {}
        for v in parent:
            acc[v] = values[v] if v in part else None
        return _PartProto(
            part_idx=idx,
            parent=parent,
            children=children,
            edge_of=edge_of,
            pending=pending,
            acc=acc,
            result={},
            members=part,
            op=self.op,
        )

    # -- messaging ------------------------------------------------------------

    def _send(self, proto: _PartProto, frm: int, to: int, eid: int, kind: int, payload, at_round: int):
        direction = 0 if frm < to else 1
        key = (eid, direction)
        self._seq += 1
        item = (at_round + 1, proto.part_idx, self._seq, kind, to, payload)
        self.queues.setdefault(key, []).append(item)

    def _vertex_ready(self, proto: _PartProto, v: int, at_round: int):
        p = proto.parent[v]
        if p is not None:
            self._send(proto, v, p, proto.edge_of[v], _UP, proto.acc[v], at_round)
        else:
            proto.result[v] = proto.acc[v]
            for c in proto.children[v]:
                self._send(proto, v, c, proto.edge_of[c], _DOWN, proto.acc[v], at_round)

    def pending_messages(self) -> int:
        return sum(len(q) for q in self.queues.values())

    def run_round(self) -> "SimState":
        """Deliver one synchronous round of messages within the edge budget."""
        self.round += 1
        r = self.round
        cap = self.budget // self.msg_bits
        delivered_any = False
        for key in sorted(self.queues):
            q = self.queues[key]
            q.sort(key=lambda it: (it[0], it[1], it[2]))
            take = []
            while q and len(take) < cap and q[0][0] <= r:
                take.append(q.pop(0))
            if not q:
                del self.queues[key]
            if not take:
                continue
            delivered_any = True
            bits = len(take) * self.msg_bits
            self.stats.max_edge_bits_any_round = max(self.stats.max_edge_bits_any_round, bits)
            for _e, part_idx, _s, kind, to, payload in take:
                self.stats.messages_sent += 1
                if self.trace is not None:
                    self.trace.append((r, key[0], part_idx, self.msg_bits))
                proto = self.protos[part_idx]
                if kind == _UP:
                    proto.acc[to] = proto.combine(proto.acc[to], payload)
                    proto.pending[to] -= 1
                    if proto.pending[to] == 0:
                        self._vertex_ready(proto, to, r)
                else:
                    proto.result[to] = payload
                    for c in proto.children[to]:
                        self._send(proto, to, c, proto.edge_of[c], _DOWN, payload, r)
        if delivered_any:
            self.stats.rounds_used = r
        return self

    def run(self) -> RoundStats:
        while self.queues:
            if self.round >= self.cfg.max_rounds:
                raise RoundLimitExceeded(
                    f"exceeded {self.cfg.max_rounds} rounds", self.stats
                )
            self.run_round()
        return self.stats

    def results(self) -> list[object]:
        out = []
        for proto in self.protos:
            vals = {proto.result.get(v) for v in proto.members}
            if len(vals) != 1:
                raise SimError(f"part {proto.part_idx} members disagree: {vals}")
            out.append(vals.pop())
        return out


def run_round(state: SimState) -> SimState:
    """Advance the simulation by one synchronous round."""
    return state.run_round()


def simulate_aggregate(
    g: AnnotatedGraph,
    parts: Partition,
    shortcut: Shortcut,
    op: str,
    values: Sequence[object],
    cfg: SimConfig | None = None,
    trace: bool = False,
) -> tuple[list[object], RoundStats, SimState]:
    """Every vertex of each part learns the part-wise aggregate of ``values``.

    Vertices outside a part relay without contributing; ``None`` values
    contribute nothing.  Communication stays inside each part's induced
    subgraph plus its shortcut edges, with the per-edge bit budget enforced
    across all parts at once.
    """
    cfg = cfg or SimConfig()
    state = SimState(g, parts, shortcut, op, values, cfg, trace=trace)
    state.run()
    return state.results(), state.stats, state


# ---------------------------------------------------------------------------
# Minimum spanning tree
# ---------------------------------------------------------------------------


def edge_ranks(g: AnnotatedGraph) -> list[int]:
    """Rank of each edge in (weight, id) order; ranks make comparisons exact
    and small enough to ship as message payloads."""
    order = sorted(range(len(g.edges)), key=lambda e: (g.edges[e][2], e))
    rank = [0] * len(g.edges)
    for r, e in enumerate(order):
        rank[e] = r
    return rank


def kruskal_mst(g: AnnotatedGraph) -> frozenset[int]:
    """Reference MST under the same (weight, edge id) tie-break."""
    parent = list(range(g.n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    out = set()
    for eid in sorted(range(len(g.edges)), key=lambda e: (g.edges[e][2], e)):
        u, v, _w = g.edges[eid]
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[max(ru, rv)] = min(ru, rv)
            out.add(eid)
    return frozenset(out)


ShortcutProvider = Callable[[Partition], Shortcut]


def empty_shortcut_provider(t: RootedTree) -> ShortcutProvider:
    """Baseline: no shortcut edges at all (parts flood internally)."""

    def provide(parts: Partition) -> Shortcut:
        return Shortcut(tree=t, edge_sets=tuple(frozenset() for _ in parts.parts))

    return provide


def boruvka_mst(
    g: AnnotatedGraph,
    shortcut_provider: ShortcutProvider,
    cfg: SimConfig | None = None,
    phase_surcharge: int = 0,
    trace: list[tuple[int, int, int, int]] | None = None,
) -> tuple[frozenset[int], RoundStats, int]:
    """Fragment-merging MST over the simulator.

    Each phase aggregates, per fragment, the minimum-rank outgoing edge and
    merges along the winners; ranks break ties by edge id so the output tree
    is unique and matches the reference exactly.  Returns (MST edge ids,
    accumulated stats, phases run); ``phase_surcharge`` adds fixed rounds per
    phase for sensitivity studies.  Passing a list as ``trace`` collects the
    per-round message log (round, edge, part, bits) across all phases, with
    rounds offset by the preceding phases.
    """
    cfg = cfg or SimConfig()
    ranks = edge_ranks(g)
    by_rank = sorted(range(len(g.edges)), key=lambda e: ranks[e])
    parent = list(range(g.n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    mst: set[int] = set()
    stats = RoundStats()
    phases = 0
    nfrag = g.n
    while nfrag > 1:
        phases += 1
        if phases > max(1, math.ceil(math.log2(g.n)) + 2):
            raise SimError("fragment count failed to shrink")
        groups: dict[int, set[int]] = {}
        for v in range(g.n):
            groups.setdefault(find(v), set()).add(v)
        frags = [frozenset(groups[r]) for r in sorted(groups, key=lambda r: min(groups[r]))]
        partition = Partition(parts=tuple(frags))
        sc = shortcut_provider(partition)
        values: list[object] = [None] * g.n
        for v in range(g.n):
            rv = find(v)
            best = None
            for _u, eid in g.adjacency[v]:
                if find(g.other(eid, v)) != rv:
                    r = ranks[eid]
                    if best is None or r < best:
                        best = r
            values[v] = best
        offset = stats.rounds_used
        res, st, state = simulate_aggregate(
            g, partition, sc, "min", values, cfg, trace=trace is not None
        )
        if trace is not None and state.trace is not None:
            trace.extend((offset + r, eid, part, bits) for r, eid, part, bits in state.trace)
        stats = stats.merged_with(st)
        stats.rounds_used += phase_surcharge
        merged = 0
        for agg in res:
            if agg is None:
                continue
            eid = by_rank[agg]
            u, v, _w = g.edges[eid]
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[max(ru, rv)] = min(ru, rv)
                mst.add(eid)
                merged += 1
        if merged == 0:
            raise SimError("no fragments merged; invalid aggregation")
        nfrag -= merged
    return frozenset(mst), stats, phases
