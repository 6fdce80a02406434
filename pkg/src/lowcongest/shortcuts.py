"""Parts, tree-restricted shortcuts, and their quality metrics.

A shortcut assigns each part an extra edge set drawn from a spanning tree.
Congestion counts how many parts share the busiest tree edge; the block
parameter counts, per part, the connected components of the shortcut edge
set that touch the part.  The quality of a shortcut against a tree of
diameter d is block * d + congestion, which governs how fast part-wise
aggregation can run.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .graph import AnnotatedGraph, RootedTree


class ShortcutError(ValueError):
    pass


@dataclass(frozen=True)
class Partition:
    """Pairwise disjoint, individually connected vertex sets."""

    parts: tuple[frozenset[int], ...]

    @staticmethod
    def of(parts: Iterable[Iterable[int]]) -> "Partition":
        return Partition(parts=tuple(frozenset(p) for p in parts))

    def __len__(self) -> int:
        return len(self.parts)

    def __iter__(self):
        return iter(self.parts)

    def part_of(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for i, p in enumerate(self.parts):
            for v in p:
                out[v] = i
        return out


def validate_parts(g: AnnotatedGraph, p: Partition) -> list[str]:
    """Overlap and connectivity violations as data; empty list means valid."""
    bad: list[str] = []
    seen: dict[int, int] = {}
    for i, part in enumerate(p.parts):
        if not part:
            bad.append(f"part {i} is empty")
            continue
        for v in sorted(part):
            if not (0 <= v < g.n):
                bad.append(f"part {i} names unknown vertex {v}")
            elif v in seen:
                bad.append(f"parts {seen[v]} and {i} overlap at {v}")
            else:
                seen[v] = i
        if not _connected_within(g, part):
            bad.append(f"part {i} induces a disconnected subgraph")
    return bad


def _connected_within(g: AnnotatedGraph, verts: frozenset[int]) -> bool:
    verts = frozenset(v for v in verts if 0 <= v < g.n)
    if not verts:
        return False
    start = min(verts)
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for u, _eid in g.adjacency[v]:
            if u in verts and u not in seen:
                seen.add(u)
                stack.append(u)
    return len(seen) == len(verts)


@dataclass(frozen=True)
class Shortcut:
    """Per-part edge sets restricted to one spanning tree."""

    tree: RootedTree
    edge_sets: tuple[frozenset[tuple[int, int]], ...]

    @staticmethod
    def of(tree: RootedTree, edge_sets: Sequence[Iterable[tuple[int, int]]]) -> "Shortcut":
        norm = []
        for es in edge_sets:
            norm.append(frozenset((u, v) if u < v else (v, u) for u, v in es))
        return Shortcut(tree=tree, edge_sets=tuple(norm))

    def validate(self) -> list[str]:
        bad = []
        tree_edges = self.tree.edge_pairs
        for i, es in enumerate(self.edge_sets):
            for e in sorted(es):
                if e not in tree_edges:
                    bad.append(f"part {i} uses non-tree edge {e[0]}-{e[1]}")
        return bad


@dataclass(frozen=True)
class QualityReport:
    congestion: int
    block: int
    diameter_used: int
    quality: int

    def __post_init__(self):
        if self.quality != self.block * self.diameter_used + self.congestion:
            raise ShortcutError("quality != block * d + congestion")


def congestion(s: Shortcut) -> int:
    """Maximum number of parts assigned any single tree edge."""
    count: dict[tuple[int, int], int] = {}
    for es in s.edge_sets:
        for e in es:
            count[e] = count.get(e, 0) + 1
    return max(count.values(), default=0)


class _DSU:
    __slots__ = ("p",)

    def __init__(self, items: Iterable[int]):
        self.p = {v: v for v in items}

    def find(self, v: int) -> int:
        p = self.p
        r = v
        while p[r] != r:
            r = p[r]
        while p[v] != r:
            p[v], v = r, p[v]
        return r

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.p[rb] = ra
        return True


def block(g: AnnotatedGraph, p: Partition, s: Shortcut) -> int:
    """Max over parts of the number of shortcut components touching the part.

    Components are taken in the spanning subgraph (V, H_i); part vertices
    not on any shortcut edge count as singleton components.
    """
    worst = 0
    for part, es in zip(p.parts, s.edge_sets):
        worst = max(worst, part_block(part, es))
    return worst


def part_block(part: frozenset[int], edges: frozenset[tuple[int, int]]) -> int:
    verts = set(part)
    for u, v in edges:
        verts.add(u)
        verts.add(v)
    dsu = _DSU(verts)
    for u, v in edges:
        dsu.union(u, v)
    return len({dsu.find(v) for v in part})


def quality(g: AnnotatedGraph, p: Partition, s: Shortcut, d: int) -> QualityReport:
    if d < 1:
        raise ShortcutError(f"diameter argument must be >= 1, got {d}")
    c = congestion(s)
    b = block(g, p, s)
    return QualityReport(congestion=c, block=b, diameter_used=d, quality=b * d + c)


# ---------------------------------------------------------------------------
# Exhaustive reference optimum for tiny instances
# ---------------------------------------------------------------------------

BRUTE_FORCE_LIMIT = 24


def brute_force_optimal(
    g: AnnotatedGraph, p: Partition, t: RootedTree, d: int | None = None
) -> tuple[Shortcut, QualityReport]:
    """Minimum-quality tree-restricted shortcut by exhaustive assignment.

    Searches every map from tree edges to part subsets (branch and bound
    over the same space), so it requires |E_T| * |parts| <= 24.  Ties are
    broken by fewer assigned edges, then by the lexicographically smallest
    assignment vector.
    """
    tree_edges = t.edges_sorted()
    m = len(p.parts)
    if len(tree_edges) * m > BRUTE_FORCE_LIMIT:
        raise ShortcutError(
            f"instance too large for brute force: {len(tree_edges)} edges * {m} parts > {BRUTE_FORCE_LIMIT}"
        )
    if d is None:
        d = max(1, t.diameter)
    if m == 0:
        sc = Shortcut(tree=t, edge_sets=())
        return sc, QualityReport(congestion=0, block=0, diameter_used=d, quality=0)

    ne = len(tree_edges)
    parts = p.parts
    best_assign: list[int] | None = None
    best_key: tuple[int, int] | None = None  # (quality, total edges)

    def eval_assign(assign: Sequence[int]) -> tuple[int, int]:
        cong = max((bin(mask).count("1") for mask in assign), default=0)
        blk = 0
        for i, part in enumerate(parts):
            es = frozenset(tree_edges[j] for j in range(ne) if assign[j] >> i & 1)
            blk = max(blk, part_block(part, es))
        total = sum(bin(mask).count("1") for mask in assign)
        return blk * d + cong, total

    def lower_bound(assign: list[int], k: int) -> int:
        # congestion can only grow; block can only shrink as edges are added
        cong_lb = max((bin(mask).count("1") for mask in assign[:k]), default=0)
        blk_lb = 0
        rest = tree_edges[k:]
        for i, part in enumerate(parts):
            es = frozenset(
                tree_edges[j] for j in range(k) if assign[j] >> i & 1
            ) | frozenset(rest)
            blk_lb = max(blk_lb, part_block(part, es))
        return blk_lb * d + cong_lb

    assign = [0] * ne

    def dfs(k: int, total: int) -> None:
        nonlocal best_assign, best_key
        if best_key is not None:
            lb = lower_bound(assign, k)
            if (lb, total) >= best_key:
                return
        if k == ne:
            key = eval_assign(assign)
            if best_key is None or key < best_key:
                best_key = key
                best_assign = assign.copy()
            return
        for mask in range(1 << m):
            assign[k] = mask
            dfs(k + 1, total + bin(mask).count("1"))
        assign[k] = 0

    dfs(0, 0)
    assert best_assign is not None and best_key is not None
    edge_sets = [
        frozenset(tree_edges[j] for j in range(ne) if best_assign[j] >> i & 1)
        for i in range(m)
    ]
    sc = Shortcut(tree=t, edge_sets=tuple(edge_sets))
    rep = quality(g, p, sc, d)
    return sc, rep
