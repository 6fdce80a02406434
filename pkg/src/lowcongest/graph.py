"""Weighted graphs with combinatorial embeddings plus rooted-tree machinery.

A planar embedding is stored as a rotation system: for each embedded vertex,
the cyclic order of its incident edge indices.  Apex vertices and
vortex-internal vertices are never embedded, and their edges appear in no
rotation list.  Face traversal, inserting a vertex into a face, and edge
contraction all operate on the rotation system alone; no coordinates exist
anywhere in the package.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

Weight = Fraction
Dart = tuple[int, int]  # (edge id, head vertex)


class GraphError(ValueError):
    """Malformed graph data, or an operation applied outside its domain."""


class EmbeddingError(GraphError):
    """Rotation system missing, inconsistent, or not a sphere embedding."""


def as_weight(w) -> Weight:
    """Coerce int / Fraction / 'p/q' string / [p, q] pair to an exact rational."""
    if isinstance(w, Fraction):
        return w
    if isinstance(w, bool):
        raise GraphError(f"bad edge weight {w!r}")
    if isinstance(w, int):
        return Fraction(w)
    if isinstance(w, str):
        return Fraction(w)
    if isinstance(w, (list, tuple)) and len(w) == 2:
        return Fraction(int(w[0]), int(w[1]))
    if isinstance(w, float):
        if w != int(w):
            raise GraphError(f"non-integral float weight {w!r}; use 'p/q'")
        return Fraction(int(w))
    raise GraphError(f"bad edge weight {w!r}")


@dataclass(frozen=True)
class VortexSpec:
    """A bounded-depth attachment along the boundary cycle of one face.

    ``boundary`` is the face cycle, in face order.  Each internal vertex
    carries a contiguous arc ``(lo, hi)`` of boundary positions (inclusive;
    ``lo > hi`` wraps around), and may connect only to boundary vertices of
    its arc and to internal vertices whose arcs overlap its own.
    """

    boundary: tuple[int, ...]
    internals: tuple[tuple[int, tuple[int, int]], ...]
    depth: int

    @property
    def internal_ids(self) -> tuple[int, ...]:
        return tuple(v for v, _ in self.internals)

    def arc_positions(self, lo: int, hi: int) -> list[int]:
        m = len(self.boundary)
        if not (0 <= lo < m and 0 <= hi < m):
            raise GraphError(f"arc ({lo},{hi}) outside boundary of length {m}")
        if lo <= hi:
            return list(range(lo, hi + 1))
        return list(range(lo, m)) + list(range(0, hi + 1))

    def arc_vertices(self, internal: int) -> tuple[int, ...]:
        for v, (lo, hi) in self.internals:
            if v == internal:
                return tuple(self.boundary[p] for p in self.arc_positions(lo, hi))
        raise GraphError(f"vertex {internal} is not internal to this vortex")

    def arcs_by_boundary_vertex(self) -> dict[int, list[int]]:
        """Map each boundary vertex to the internal vertices whose arc holds it."""
        out: dict[int, list[int]] = {b: [] for b in self.boundary}
        for v, (lo, hi) in self.internals:
            for p in self.arc_positions(lo, hi):
                out[self.boundary[p]].append(v)
        return out


@dataclass(frozen=True)
class AnnotatedGraph:
    """Undirected weighted graph with optional embedding, apices, vortices.

    ``rotation`` is either ``None`` (no embedding data at all) or a
    per-vertex tuple whose entries are ``None`` (vertex not embedded) or the
    cyclic order of incident embedded edge ids.  An edge is *embedded* when
    it appears in the rotation of both endpoints.
    """

    n: int
    edges: tuple[tuple[int, int, Weight], ...]
    rotation: tuple[tuple[int, ...] | None, ...] | None = None
    apices: tuple[int, ...] = ()
    vortices: tuple[VortexSpec, ...] = ()

    # -- construction ------------------------------------------------------

    @staticmethod
    def build(
        n: int,
        edges: Iterable[tuple[int, int, object]],
        rotation: Sequence[Sequence[int] | None] | None = None,
        apices: Iterable[int] = (),
        vortices: Iterable[VortexSpec] = (),
    ) -> "AnnotatedGraph":
        es = []
        for u, v, w in edges:
            if u == v:
                raise GraphError(f"self-loop at {u}")
            a, b = (u, v) if u < v else (v, u)
            es.append((a, b, as_weight(w)))
        rot = None
        if rotation is not None:
            rot = tuple(None if r is None else tuple(r) for r in rotation)
            if len(rot) != n:
                raise GraphError("rotation length != n")
        return AnnotatedGraph(
            n=n,
            edges=tuple(es),
            rotation=rot,
            apices=tuple(sorted(set(apices))),
            vortices=tuple(vortices),
        )

    # -- basic views -------------------------------------------------------

    @cached_property
    def adjacency(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """Per vertex, the sorted tuple of (neighbor, edge id)."""
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.n)]
        for eid, (u, v, _w) in enumerate(self.edges):
            adj[u].append((v, eid))
            adj[v].append((u, eid))
        return tuple(tuple(sorted(a)) for a in adj)

    def neighbors(self, v: int) -> list[int]:
        return [u for u, _ in self.adjacency[v]]

    def other(self, eid: int, v: int) -> int:
        u, w, _ = self.edges[eid]
        if v == u:
            return w
        if v == w:
            return u
        raise GraphError(f"vertex {v} not on edge {eid}")

    @cached_property
    def edge_lookup(self) -> dict[tuple[int, int], int]:
        """Lowest edge id for each (u, v) endpoint pair, u < v."""
        out: dict[tuple[int, int], int] = {}
        for eid, (u, v, _w) in enumerate(self.edges):
            out.setdefault((u, v), eid)
        return out

    def edge_id(self, u: int, v: int) -> int:
        key = (u, v) if u < v else (v, u)
        eid = self.edge_lookup.get(key)
        if eid is None:
            raise GraphError(f"no edge {u}-{v}")
        return eid

    def has_edge(self, u: int, v: int) -> bool:
        key = (u, v) if u < v else (v, u)
        return key in self.edge_lookup

    def is_embedded_vertex(self, v: int) -> bool:
        return self.rotation is not None and self.rotation[v] is not None

    @cached_property
    def embedded_edges(self) -> frozenset[int]:
        """Edges present in the rotation of both endpoints."""
        if self.rotation is None:
            return frozenset()
        present: list[set[int]] = [set(r) if r is not None else set() for r in self.rotation]
        out = set()
        for eid, (u, v, _w) in enumerate(self.edges):
            if eid in present[u] and eid in present[v]:
                out.add(eid)
        return frozenset(out)

    @property
    def vortex_internal_ids(self) -> frozenset[int]:
        out: set[int] = set()
        for vx in self.vortices:
            out.update(vx.internal_ids)
        return frozenset(out)

    # -- validation --------------------------------------------------------

    def validate(self) -> list[str]:
        """Return human-readable violations; empty list means the graph is sound."""
        bad: list[str] = []
        for eid, (u, v, w) in enumerate(self.edges):
            if not (0 <= u < self.n and 0 <= v < self.n):
                bad.append(f"edge {eid} endpoint out of range")
            if u == v:
                bad.append(f"edge {eid} is a self-loop")
            if w < 0:
                bad.append(f"edge {eid} has negative weight")
        if self.n > 0:
            seen = bfs_order(self, 0)
            if len(seen) != self.n:
                missing = min(set(range(self.n)) - set(seen))
                bad.append(f"graph disconnected: vertex {missing} unreachable from 0")
        bad.extend(self._validate_rotation())
        bad.extend(self._validate_vortices())
        return bad

    def _validate_rotation(self) -> list[str]:
        bad: list[str] = []
        if self.rotation is None:
            return bad
        internals = self.vortex_internal_ids
        for v, rot in enumerate(self.rotation):
            if rot is None:
                continue
            if v in self.apices:
                bad.append(f"apex {v} carries a rotation entry")
            if v in internals:
                bad.append(f"vortex-internal vertex {v} carries a rotation entry")
            if len(set(rot)) != len(rot):
                bad.append(f"rotation of {v} repeats an edge")
            for eid in rot:
                if not (0 <= eid < len(self.edges)):
                    bad.append(f"rotation of {v} names unknown edge {eid}")
                    continue
                u, w, _ = self.edges[eid]
                if v not in (u, w):
                    bad.append(f"rotation of {v} names non-incident edge {eid}")
                else:
                    o = w if v == u else u
                    orot = self.rotation[o]
                    if orot is None or eid not in orot:
                        bad.append(f"edge {eid} embedded at {v} but not at {o}")
        # Euler check on the embedded subgraph, when it is connected.
        try:
            emb = self.embedding()
        except EmbeddingError as exc:
            bad.append(str(exc))
            return bad
        if emb is not None and emb.euler_violation is not None:
            bad.append(emb.euler_violation)
        return bad

    def _validate_vortices(self) -> list[str]:
        bad: list[str] = []
        counts: dict[int, int] = {}
        for vi, vx in enumerate(self.vortices):
            if vx.depth < 1:
                bad.append(f"vortex {vi} has non-positive depth")
            per_vertex: dict[int, int] = {}
            allowed: dict[int, set[int]] = {}
            for v, (lo, hi) in vx.internals:
                try:
                    arc = [vx.boundary[p] for p in vx.arc_positions(lo, hi)]
                except GraphError as exc:
                    bad.append(f"vortex {vi}: {exc}")
                    continue
                allowed[v] = set(arc)
                for b in arc:
                    per_vertex[b] = per_vertex.get(b, 0) + 1
            for b, c in per_vertex.items():
                if c > vx.depth:
                    bad.append(f"vortex {vi}: boundary vertex {b} lies on {c} arcs > depth {vx.depth}")
            internal_set = set(vx.internal_ids)
            for v, _arc in vx.internals:
                for u in self.neighbors(v):
                    if u in allowed.get(v, set()):
                        continue
                    if u in internal_set and allowed.get(u, set()) & allowed.get(v, set()):
                        continue
                    bad.append(f"vortex {vi}: internal {v} adjacent to out-of-arc vertex {u}")
            if self.rotation is not None and not self._boundary_is_face(vx.boundary):
                bad.append(f"vortex {vi}: boundary cycle is not a face of the embedding")
        for vi, vx in enumerate(self.vortices):
            for v in vx.internal_ids:
                counts[v] = counts.get(v, 0) + 1
        for v, c in counts.items():
            if c > 1:
                bad.append(f"vertex {v} internal to {c} vortices")
        return bad

    def _boundary_is_face(self, boundary: tuple[int, ...]) -> bool:
        try:
            emb = self.embedding()
        except EmbeddingError:
            return False
        if emb is None:
            return False
        want = _canonical_cycle(boundary)
        return any(_canonical_cycle(emb.face_vertices(i)) == want for i in range(len(emb.faces)))

    def require_valid(self) -> "AnnotatedGraph":
        bad = self.validate()
        if bad:
            raise GraphError("; ".join(bad))
        return self

    # -- embedding ---------------------------------------------------------

    def embedding(self) -> "Embedding | None":
        """Faces of the embedded subgraph, or None when no rotation data exists."""
        if self.rotation is None:
            return None
        return Embedding.of(self)


def _canonical_cycle(cyc: Sequence[int]) -> tuple[int, ...]:
    """Rotation- and reflection-invariant form of a vertex cycle."""
    cyc = list(cyc)
    if not cyc:
        return ()
    best = None
    for seq in (cyc, cyc[::-1]):
        k = seq.index(min(seq))
        cand = tuple(seq[k:] + seq[:k])
        if best is None or cand < best:
            best = cand
    return best


@dataclass(frozen=True)
class Embedding:
    """Face structure of the embedded subgraph of an AnnotatedGraph.

    Faces are dart cycles; a dart is (edge id, head vertex).  The successor
    of dart (e, v) leaves v along the edge after e in v's rotation.
    """

    faces: tuple[tuple[Dart, ...], ...]
    dart_face: Mapping[Dart, int]
    outer: int
    euler_violation: str | None

    @staticmethod
    def of(g: AnnotatedGraph) -> "Embedding":
        assert g.rotation is not None
        pos: dict[Dart, int] = {}
        rots: dict[int, tuple[int, ...]] = {}
        emb_edges = g.embedded_edges
        for v, rot in enumerate(g.rotation):
            if rot is None:
                continue
            filtered = tuple(e for e in rot if e in emb_edges)
            rots[v] = filtered
            for i, e in enumerate(filtered):
                pos[(e, v)] = i
        darts: list[Dart] = []
        for eid in sorted(emb_edges):
            u, v, _ = g.edges[eid]
            darts.append((eid, v))  # u -> v
            darts.append((eid, u))  # v -> u
        seen: set[Dart] = set()
        faces: list[tuple[Dart, ...]] = []
        dart_face: dict[Dart, int] = {}
        for start in darts:
            if start in seen:
                continue
            face: list[Dart] = []
            d = start
            while True:
                if d in seen:
                    raise EmbeddingError(f"rotation inconsistent: dart {d} visited twice")
                seen.add(d)
                face.append(d)
                eid, head = d
                rot = rots[head]
                i = pos[(eid, head)]
                nxt = rot[(i + 1) % len(rot)]
                d = (nxt, g.other(nxt, head))
                if d == start:
                    break
            idx = len(faces)
            faces.append(tuple(face))
            for dd in face:
                dart_face[dd] = idx
        total = sum(len(f) for f in faces)
        if total != 2 * len(emb_edges):
            raise EmbeddingError("face traversal did not cover every edge side exactly once")
        euler = None
        emb_vertices = set(rots)
        if emb_vertices:
            reach = _embedded_component(g, rots, emb_edges)
            if reach == emb_vertices:
                V, E, F = len(emb_vertices), len(emb_edges), len(faces)
                if V - E + F != 2:
                    euler = f"embedded subgraph violates V-E+F=2 (got {V}-{E}+{F})"
        outer = 0
        best = (-1, 0)
        for i, f in enumerate(faces):
            cand = (len(f), -i)
            if cand > best:
                best = cand
                outer = i
        return Embedding(faces=tuple(faces), dart_face=dart_face, outer=outer, euler_violation=euler)

    def face_vertices(self, i: int) -> tuple[int, ...]:
        return tuple(head for _e, head in self.faces[i])

    @cached_property
    def edge_sides(self) -> dict[int, tuple[int, int]]:
        """For each embedded edge, the faces on its two sides."""
        out: dict[int, tuple[int, int]] = {}
        for (eid, _head), f in self.dart_face.items():
            if eid in out:
                out[eid] = (out[eid][0], f)
            else:
                out[eid] = (f, f)
        return out

    @cached_property
    def vertex_faces(self) -> dict[int, frozenset[int]]:
        out: dict[int, set[int]] = {}
        for (eid, head), f in self.dart_face.items():
            out.setdefault(head, set()).add(f)
        # The tail vertex of a dart touches the same face via its own darts,
        # so head-only accumulation is complete for every non-isolated vertex.
        return {v: frozenset(s) for v, s in out.items()}


def faces(g: AnnotatedGraph) -> list[tuple[Dart, ...]]:
    """Faces of the embedded subgraph by next-edge traversal of the rotation
    system; raises when rotation data is missing or inconsistent."""
    emb = g.embedding()
    if emb is None:
        raise EmbeddingError("no rotation system")
    return list(emb.faces)


def _embedded_component(g: AnnotatedGraph, rots: dict[int, tuple[int, ...]], emb_edges: frozenset[int]) -> set[int]:
    verts = set(rots)
    if not verts:
        return set()
    start = min(verts)
    seen = {start}
    q = deque([start])
    while q:
        v = q.popleft()
        for e in rots[v]:
            u = g.other(e, v)
            if u not in seen:
                seen.add(u)
                q.append(u)
    return seen


# ---------------------------------------------------------------------------
# Rooted trees
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RootedTree:
    """A rooted tree over a subset of a host graph's vertices.

    ``parent[v]`` is None for the root and for uncovered vertices;
    ``depth_of[v]`` is None exactly for uncovered vertices.
    """

    root: int
    parent: tuple[int | None, ...]
    depth_of: tuple[int | None, ...]
    diameter: int

    @cached_property
    def covered(self) -> frozenset[int]:
        return frozenset(v for v, d in enumerate(self.depth_of) if d is not None)

    def covers(self, v: int) -> bool:
        return self.depth_of[v] is not None

    @cached_property
    def edge_pairs(self) -> frozenset[tuple[int, int]]:
        out = set()
        for v, p in enumerate(self.parent):
            if p is not None:
                out.add((v, p) if v < p else (p, v))
        return frozenset(out)

    def edges_sorted(self) -> list[tuple[int, int]]:
        return sorted(self.edge_pairs)

    @cached_property
    def children(self) -> dict[int, tuple[int, ...]]:
        ch: dict[int, list[int]] = {v: [] for v in self.covered}
        for v, p in enumerate(self.parent):
            if p is not None:
                ch[p].append(v)
        return {v: tuple(sorted(c)) for v, c in ch.items()}

    def path_to_root(self, v: int) -> list[int]:
        if not self.covers(v):
            raise GraphError(f"vertex {v} not covered by the tree")
        out = [v]
        while self.parent[out[-1]] is not None:
            out.append(self.parent[out[-1]])
        return out

    def tree_path(self, u: int, v: int) -> list[int]:
        """Vertex path from u to v through their lowest common ancestor."""
        if not (self.covers(u) and self.covers(v)):
            raise GraphError("endpoint not covered by the tree")
        pu, pv = [u], [v]
        du, dv = self.depth_of[u], self.depth_of[v]
        assert du is not None and dv is not None
        while du > dv:
            pu.append(self.parent[pu[-1]])
            du -= 1
        while dv > du:
            pv.append(self.parent[pv[-1]])
            dv -= 1
        while pu[-1] != pv[-1]:
            pu.append(self.parent[pu[-1]])
            pv.append(self.parent[pv[-1]])
        return pu + pv[-2::-1]

    def validate_against(self, g: AnnotatedGraph) -> list[str]:
        bad = []
        for u, v in self.edge_pairs:
            if not g.has_edge(u, v):
                bad.append(f"tree edge {u}-{v} absent from host graph")
        if not self.covers(self.root):
            bad.append("root not covered")
        if len(self.edge_pairs) != len(self.covered) - 1:
            bad.append("edge count != covered vertices - 1")
        return bad


def tree_diameter(parent: Sequence[int | None], covered: Iterable[int]) -> int:
    """Exact diameter of a tree given by parent links, via double BFS."""
    covered = list(covered)
    if not covered:
        return 0
    adj: dict[int, list[int]] = {v: [] for v in covered}
    for v in covered:
        p = parent[v]
        if p is not None:
            adj[v].append(p)
            adj[p].append(v)

    def far(src: int) -> tuple[int, int]:
        dist = {src: 0}
        q = deque([src])
        best = (0, src)
        while q:
            x = q.popleft()
            for y in adj[x]:
                if y not in dist:
                    dist[y] = dist[x] + 1
                    best = max(best, (dist[y], y))
                    q.append(y)
        return best

    _, a = far(covered[0])
    d, _ = far(a)
    return d


def bfs_order(g: AnnotatedGraph, root: int) -> list[int]:
    seen = {root}
    order = [root]
    q = deque([root])
    while q:
        v = q.popleft()
        for u, _eid in g.adjacency[v]:
            if u not in seen:
                seen.add(u)
                order.append(u)
                q.append(u)
    return order


def bfs_tree(g: AnnotatedGraph, root: int) -> RootedTree:
    """Breadth-first spanning tree; raises on disconnected hosts."""
    if not (0 <= root < g.n):
        raise GraphError(f"root {root} out of range")
    parent: list[int | None] = [None] * g.n
    depth: list[int | None] = [None] * g.n
    depth[root] = 0
    q = deque([root])
    while q:
        v = q.popleft()
        for u, _eid in g.adjacency[v]:
            if depth[u] is None:
                depth[u] = depth[v] + 1
                parent[u] = v
                q.append(u)
    missing = [v for v in range(g.n) if depth[v] is None]
    if missing:
        raise GraphError(f"graph disconnected: vertex {missing[0]} unreachable from {root}")
    diam = tree_diameter(parent, range(g.n))
    return RootedTree(root=root, parent=tuple(parent), depth_of=tuple(depth), diameter=diam)


def bfs_distances(g: AnnotatedGraph, src: int, within: frozenset[int] | None = None) -> dict[int, int]:
    dist = {src: 0}
    q = deque([src])
    while q:
        v = q.popleft()
        for u, _eid in g.adjacency[v]:
            if within is not None and u not in within:
                continue
            if u not in dist:
                dist[u] = dist[v] + 1
                q.append(u)
    return dist


def induced_diameter(g: AnnotatedGraph, verts: frozenset[int]) -> int:
    """Exact diameter of the induced subgraph (must be connected)."""
    if not verts:
        return 0
    best = 0
    for v in verts:
        dist = bfs_distances(g, v, within=verts)
        if len(dist) != len(verts):
            raise GraphError("induced subgraph disconnected")
        best = max(best, max(dist.values()))
    return best


def induced_center(g: AnnotatedGraph, verts: frozenset[int]) -> int:
    """Vertex of minimum eccentricity in the induced subgraph (ties: lowest id)."""
    best: tuple[int, int] | None = None
    for v in sorted(verts):
        dist = bfs_distances(g, v, within=verts)
        if len(dist) != len(verts):
            raise GraphError("induced subgraph disconnected")
        ecc = max(dist.values())
        if best is None or ecc < best[0]:
            best = (ecc, v)
    assert best is not None
    return best[1]


def subtree_bfs_tree(g: AnnotatedGraph, verts: frozenset[int], root: int) -> RootedTree:
    """BFS tree of the induced subgraph, covering exactly ``verts``."""
    parent: list[int | None] = [None] * g.n
    depth: list[int | None] = [None] * g.n
    depth[root] = 0
    q = deque([root])
    while q:
        v = q.popleft()
        for u, _eid in g.adjacency[v]:
            if u in verts and depth[u] is None:
                depth[u] = depth[v] + 1
                parent[u] = v
                q.append(u)
    if sum(1 for v in verts if depth[v] is not None) != len(verts):
        raise GraphError("induced subgraph disconnected")
    diam = tree_diameter(parent, verts)
    return RootedTree(root=root, parent=tuple(parent), depth_of=tuple(depth), diameter=diam)


# ---------------------------------------------------------------------------
# Heavy-light decomposition
# ---------------------------------------------------------------------------


def heavy_chains(children: Mapping[int, Sequence[int]], root: int) -> list[list[int]]:
    """Chains of a rooted tree; each non-leaf continues into its largest child
    (ties broken by lowest id), so any root-to-leaf path switches chains at
    most floor(log2 n) + 1 times."""
    size: dict[int, int] = {}
    order: list[int] = []
    stack = [root]
    while stack:
        v = stack.pop()
        order.append(v)
        stack.extend(children.get(v, ()))
    for v in reversed(order):
        size[v] = 1 + sum(size[c] for c in children.get(v, ()))
    heavy: dict[int, int | None] = {}
    for v in order:
        kids = children.get(v, ())
        if kids:
            heavy[v] = min(kids, key=lambda c: (-size[c], c))
        else:
            heavy[v] = None
    # A vertex heads a chain iff it is the root or not its parent's heavy child.
    chains: list[list[int]] = []
    is_heavy_target = {h for h in heavy.values() if h is not None}
    for v in order:
        if v == root or v not in is_heavy_target:
            chain = [v]
            while heavy.get(chain[-1]) is not None:
                chain.append(heavy[chain[-1]])
            chains.append(chain)
    return chains


def heavy_light(t: RootedTree) -> list[list[int]]:
    """Heavy-light chains of a rooted tree, each listed head to tail."""
    return heavy_chains(t.children, t.root)


# ---------------------------------------------------------------------------
# Path contraction and repaired trees
# ---------------------------------------------------------------------------


def path_contraction(t: RootedTree, keep: frozenset[int], s: int, t2: int) -> list[int]:
    """Tree path from s to t2 with vertices outside ``keep`` deleted.

    The result is a subsequence of the original path, so it is a minor of the
    tree; consecutive survivors become edges of a repaired tree.
    """
    if s not in keep or t2 not in keep:
        raise GraphError("path endpoints must be kept")
    path = t.tree_path(s, t2)
    return [v for v in path if v in keep]


def repaired_tree(t: RootedTree, keep: frozenset[int]) -> RootedTree:
    """Contract the tree onto ``keep``: each kept vertex's new parent is its
    nearest kept strict ancestor.  The result is a minor of the input tree,
    spans ``keep`` and keeps every surviving original tree edge."""
    keep = frozenset(keep)
    for v in keep:
        if not t.covers(v):
            raise GraphError(f"vertex {v} not covered by the tree")
    nearest: dict[int, int | None] = {}

    def up(v: int) -> int | None:
        # nearest kept ancestor of v, v itself allowed
        seen: list[int] = []
        x: int | None = v
        while x is not None and x not in nearest:
            if x in keep:
                nearest[x] = x
                break
            seen.append(x)
            x = t.parent[x]
        val = nearest[x] if x is not None and x in nearest else None
        for y in seen:
            nearest[y] = val
        return val

    n = len(t.parent)
    parent: list[int | None] = [None] * n
    depth: list[int | None] = [None] * n
    root = None
    for v in sorted(keep):
        p = t.parent[v]
        anc = up(p) if p is not None else None
        parent[v] = anc
        if anc is None:
            if root is not None:
                raise GraphError("kept set spans multiple root branches with no common kept ancestor")
            root = v
    if root is None:
        raise GraphError("empty keep set")
    # depths by walking the new parent links
    def fill_depth(v: int) -> None:
        trail = []
        while depth[v] is None and parent[v] is not None:
            trail.append(v)
            v = parent[v]
        if depth[v] is None:
            depth[v] = 0
        for x in reversed(trail):
            depth[x] = depth[parent[x]] + 1

    for v in keep:
        fill_depth(v)
    diam = tree_diameter(parent, keep)
    return RootedTree(root=root, parent=tuple(parent), depth_of=tuple(depth), diameter=diam)


# ---------------------------------------------------------------------------
# Contraction of everything outside a kept set
# ---------------------------------------------------------------------------


def contract_outside(
    g: AnnotatedGraph,
    keep: Iterable[int],
    parts: Sequence[frozenset[int]] = (),
    keep_rotation: bool = True,
) -> tuple[AnnotatedGraph, dict[int, int]]:
    """Remove every vertex outside ``keep`` by edge contraction.

    Vertices are processed in ascending id order.  A vertex belonging to a
    part with a same-part neighbor is contracted along the lowest-id such
    neighbor, otherwise along its lowest-id neighbor; this keeps every
    surviving part connected and leaves (kept vertex, part) incidences
    unchanged.  Rotations are spliced through contractions, so a fully
    embedded input stays embedded.  Parallel edges keep the lowest id;
    vortices whose vertices get contracted are dropped from the result.

    Returns the relabeled graph and the map original id -> new id.
    """
    keep_set = frozenset(keep)
    if not keep_set:
        raise GraphError("keep set empty")
    for v in keep_set:
        if not (0 <= v < g.n):
            raise GraphError(f"keep vertex {v} out of range")

    part_of: dict[int, int] = {}
    for i, p in enumerate(parts):
        for v in p:
            if v in part_of:
                raise GraphError(f"parts overlap at {v}")
            part_of[v] = i

    ends: dict[int, tuple[int, int]] = {eid: (u, v) for eid, (u, v, _w) in enumerate(g.edges)}
    inc: dict[int, set[int]] = {v: set() for v in range(g.n)}
    for eid, (u, v) in ends.items():
        inc[u].add(eid)
        inc[v].add(eid)
    rot: dict[int, list[int] | None] = {}
    track_rot = keep_rotation and g.rotation is not None
    emb = g.embedded_edges if track_rot else frozenset()
    for v in range(g.n):
        if track_rot and g.rotation[v] is not None:
            rot[v] = [e for e in g.rotation[v] if e in emb]
        else:
            rot[v] = None
    alive = set(range(g.n))
    absorbed: dict[int, int] = {}

    def rot_remove(v: int, eid: int) -> None:
        r = rot[v]
        if r is not None:
            rot[v] = [e for e in r if e != eid]

    def drop_edge(eid: int) -> None:
        u, v = ends[eid]
        inc[u].discard(eid)
        inc[v].discard(eid)
        rot_remove(u, eid)
        rot_remove(v, eid)
        del ends[eid]

    def merge(v: int, u: int, via: int) -> None:
        rv, ru = rot[v], rot[u]
        if rv is not None and ru is not None and via in rv and via in ru:
            iu, iv = ru.index(via), rv.index(via)
            seq = rv[iv + 1 :] + rv[:iv]
            rot[u] = ru[:iu] + seq + ru[iu + 1 :]
        elif rv is not None and ru is None:
            # v's embedded edges leave the planar subgraph
            for e in list(inc[v]):
                w = ends[e][0] if ends[e][1] == v else ends[e][1]
                rot_remove(w, e)
            rot[v] = None
        # re-endpoint v's edges onto u
        for e in sorted(inc[v]):
            a, b = ends[e]
            a2 = u if a == v else a
            b2 = u if b == v else b
            if a2 == b2:
                # loop u-u: purge both rotation occurrences
                inc[u].discard(e)
                inc[v].discard(e)
                r = rot[u]
                if r is not None:
                    rot[u] = [x for x in r if x != e]
                del ends[e]
                continue
            ends[e] = (a2, b2) if a2 < b2 else (b2, a2)
            inc[v].discard(e)
            inc[u].add(e)
            if rot[u] is None:
                # merged vertex not embedded: edge leaves the planar subgraph
                w = a2 if b2 == u else b2
                rot_remove(w, e)
        # dedupe parallel edges at u
        by_other: dict[int, list[int]] = {}
        for e in inc[u]:
            a, b = ends[e]
            w = a if b == u else b
            by_other.setdefault(w, []).append(e)
        for w, eids in by_other.items():
            if len(eids) > 1:
                eids.sort()
                for e in eids[1:]:
                    drop_edge(e)
        alive.discard(v)
        absorbed[v] = u

    for v in sorted(set(range(g.n)) - keep_set):
        nbr_edges: dict[int, int] = {}
        for e in sorted(inc[v]):
            a, b = ends[e]
            w = a if b == v else b
            nbr_edges.setdefault(w, e)
        if not nbr_edges:
            raise GraphError(f"vertex {v} has no contraction target")
        pv = part_of.get(v)
        same = sorted(w for w in nbr_edges if pv is not None and part_of.get(w) == pv)
        target = same[0] if same else min(nbr_edges)
        merge(v, target, nbr_edges[target])
        # absorber keeps its own membership; v's dies with it
        part_of.pop(v, None)

    def resolve(v: int) -> int:
        trail = []
        while v in absorbed:
            trail.append(v)
            v = absorbed[v]
        for x in trail:
            absorbed[x] = v
        return v

    new_id = {old: i for i, old in enumerate(sorted(alive))}
    eorder = sorted(ends, key=lambda e: (ends[e][0], ends[e][1], e))
    eid_new = {e: i for i, e in enumerate(eorder)}
    new_edges = [(new_id[ends[e][0]], new_id[ends[e][1]], g.edges[e][2]) for e in eorder]
    new_rot: list[tuple[int, ...] | None] = [None] * len(alive)
    if track_rot:
        for old in alive:
            r = rot[old]
            if r is not None:
                new_rot[new_id[old]] = tuple(eid_new[e] for e in r)
    apices = tuple(sorted(new_id[a] for a in g.apices if a in alive))
    vortices = []
    for vx in g.vortices:
        touched = set(vx.boundary) | set(vx.internal_ids)
        if touched <= alive:
            vortices.append(
                VortexSpec(
                    boundary=tuple(new_id[b] for b in vx.boundary),
                    internals=tuple((new_id[v], arc) for v, arc in vx.internals),
                    depth=vx.depth,
                )
            )
    out = AnnotatedGraph(
        n=len(alive),
        edges=tuple(new_edges),
        rotation=tuple(new_rot) if track_rot else None,
        apices=apices,
        vortices=tuple(vortices),
    )
    mapping = {v: new_id[resolve(v)] for v in range(g.n)}
    return out, mapping


# ---------------------------------------------------------------------------
# Face surgery
# ---------------------------------------------------------------------------


def insert_vertex_in_face(
    g: AnnotatedGraph, face: Sequence[Dart], weight: object = 1
) -> tuple[AnnotatedGraph, int]:
    """Add a new vertex inside the given face, joined to every face corner.

    The face must be a simple cycle (no repeated corner vertex).  The new
    vertex is embedded; each new edge lands in the corner between the
    arriving dart and its rotation successor, so the face is subdivided into
    triangles and the embedding stays a sphere embedding.
    """
    if g.rotation is None:
        raise EmbeddingError("no rotation system")
    heads = [head for _e, head in face]
    if len(set(heads)) != len(heads):
        raise EmbeddingError("face is not a simple cycle")
    x = g.n
    w = as_weight(weight)
    new_edges = list(g.edges)
    new_rot: list[list[int] | None] = [None if r is None else list(r) for r in g.rotation]
    star_edges = []
    for eid, head in face:
        ne = len(new_edges)
        a, b = (head, x) if head < x else (x, head)
        new_edges.append((a, b, w))
        r = new_rot[head]
        if r is None or eid not in r:
            raise EmbeddingError(f"face dart ({eid},{head}) not embedded")
        i = r.index(eid)
        r.insert(i + 1, ne)
        star_edges.append(ne)
    new_rot.append(list(reversed(star_edges)))
    out = AnnotatedGraph(
        n=g.n + 1,
        edges=tuple(new_edges),
        rotation=tuple(tuple(r) if r is not None else None for r in new_rot),
        apices=g.apices,
        vortices=g.vortices,
    )
    return out, x


def face_of_boundary(g: AnnotatedGraph, boundary: tuple[int, ...]) -> tuple[Dart, ...]:
    """The embedding face whose vertex cycle matches ``boundary``."""
    emb = g.embedding()
    if emb is None:
        raise EmbeddingError("no rotation system")
    want = _canonical_cycle(boundary)
    for i in range(len(emb.faces)):
        if _canonical_cycle(emb.face_vertices(i)) == want:
            return emb.faces[i]
    raise EmbeddingError("vortex boundary is not a face of the embedding")


def add_vortex_stars(g: AnnotatedGraph) -> tuple[AnnotatedGraph, tuple[int, ...]]:
    """Insert one embedded star vertex per vortex inside its face.

    Internal vortex vertices stay in the graph.  Returns the enlarged graph
    and the star ids, one per vortex in order.
    """
    cur = g
    stars: list[int] = []
    for vx in g.vortices:
        face = face_of_boundary(cur, vx.boundary)
        cur, star = insert_vertex_in_face(cur, face)
        stars.append(star)
    return cur, tuple(stars)


def replace_vortices_with_stars(
    g: AnnotatedGraph,
) -> tuple[AnnotatedGraph, dict[int, int], tuple[int, ...]]:
    """Delete all vortex internals and star each vortex face instead.

    Returns (new graph, old id -> new id map for surviving vertices, star ids
    per vortex).  The result carries no vortex annotations.
    """
    internals = g.vortex_internal_ids
    keep = sorted(set(range(g.n)) - internals)
    new_id = {old: i for i, old in enumerate(keep)}
    kept_edges = []
    for u, v, w in g.edges:
        if u in internals or v in internals:
            continue
        kept_edges.append((new_id[u], new_id[v], w))
    # old edge id -> new edge id (for rotation translation)
    emap: dict[int, int] = {}
    ne = 0
    for eid, (u, v, _w) in enumerate(g.edges):
        if u in internals or v in internals:
            continue
        emap[eid] = ne
        ne += 1
    rot = None
    if g.rotation is not None:
        rot = [None] * len(keep)
        for old in keep:
            r = g.rotation[old]
            if r is not None:
                rot[new_id[old]] = tuple(emap[e] for e in r if e in emap)
    base = AnnotatedGraph(
        n=len(keep),
        edges=tuple(kept_edges),
        rotation=tuple(rot) if rot is not None else None,
        apices=tuple(sorted(new_id[a] for a in g.apices if a in new_id)),
        vortices=(),
    )
    stars: list[int] = []
    cur = base
    for vx in g.vortices:
        boundary = tuple(new_id[b] for b in vx.boundary)
        face = face_of_boundary(cur, boundary)
        cur, star = insert_vertex_in_face(cur, face)
        stars.append(star)
    return cur, new_id, tuple(stars)
