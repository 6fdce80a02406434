"""Seeded graph-family generators with the side data the constructors need.

Every generator is deterministic in (family, parameters, seed) and returns a
graph whose annotations are consistent by construction: grids and stacked
triangulations carry rotation systems, apexed variants list their apices,
vortex variants carry validated vortex data, and clique-sum families emit
the decomposition tree alongside the graph.  A default valid partition
rides along for end-to-end runs.
"""
from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

from .decomposition import CliqueSumTree
from .graph import AnnotatedGraph, GraphError, VortexSpec, bfs_distances
from .shortcuts import Partition

FAMILIES = (
    "grid",
    "cycle",
    "wheel",
    "random_planar",
    "apexed_planar",
    "planar_with_vortex",
    "cliquesum_chain",
    "cliquesum_tree",
)


@dataclass(frozen=True)
class FamilySpec:
    family: str
    parameters: dict[str, int] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise GraphError(f"unknown family {self.family!r}")

    def label(self) -> str:
        params = ",".join(f"{k}={v}" for k, v in sorted(self.parameters.items()))
        return f"{self.family}({params})#{self.seed}"


@dataclass(frozen=True)
class GeneratedInstance:
    spec: FamilySpec
    graph: AnnotatedGraph
    parts: Partition
    cliquesum: CliqueSumTree | None = None


def generate(spec: FamilySpec) -> GeneratedInstance:
    fn = _GENERATORS[spec.family]
    return fn(spec)


def _weights(rng: random.Random, m: int, distinct: bool = True) -> list[int]:
    if distinct:
        ws = rng.sample(range(1, max(2, 10 * m + 1)), m)
    else:
        ws = [rng.randint(1, 100) for _ in range(m)]
    return ws


# -- planar hosts ---------------------------------------------------------------


def grid_graph(k: int, rng: random.Random | None = None) -> AnnotatedGraph:
    """k x k grid with the natural rotation (N, E, S, W per vertex)."""
    if k < 1:
        raise GraphError("grid needs k >= 1")

    def vid(r: int, c: int) -> int:
        return r * k + c

    edges: list[tuple[int, int, int]] = []
    eidx: dict[tuple[int, int], int] = {}
    for r in range(k):
        for c in range(k):
            if c + 1 < k:
                eidx[(vid(r, c), vid(r, c + 1))] = len(edges)
                edges.append((vid(r, c), vid(r, c + 1), 1))
            if r + 1 < k:
                eidx[(vid(r, c), vid(r + 1, c))] = len(edges)
                edges.append((vid(r, c), vid(r + 1, c), 1))
    if rng is not None:
        ws = _weights(rng, len(edges))
        edges = [(u, v, w) for (u, v, _), w in zip(edges, ws)]
    rotation: list[tuple[int, ...]] = []
    for r in range(k):
        for c in range(k):
            rot = []
            if r > 0:
                rot.append(eidx[(vid(r - 1, c), vid(r, c))])  # north
            if c + 1 < k:
                rot.append(eidx[(vid(r, c), vid(r, c + 1))])  # east
            if r + 1 < k:
                rot.append(eidx[(vid(r, c), vid(r + 1, c))])  # south
            if c > 0:
                rot.append(eidx[(vid(r, c - 1), vid(r, c))])  # west
            rotation.append(tuple(rot))
    return AnnotatedGraph.build(k * k, edges, rotation=rotation)


def cycle_graph(n: int, rng: random.Random | None = None) -> AnnotatedGraph:
    if n < 3:
        raise GraphError("cycle needs n >= 3")
    edges = [(i, (i + 1) % n, 1) for i in range(n)]
    if rng is not None:
        ws = _weights(rng, n)
        edges = [(u, v, w) for (u, v, _), w in zip(edges, ws)]
    rotation = []
    for i in range(n):
        prev_e = (i - 1) % n
        next_e = i
        rotation.append((prev_e, next_e))
    return AnnotatedGraph.build(n, edges, rotation=rotation)


def wheel_graph(n: int, rng: random.Random | None = None) -> AnnotatedGraph:
    """Hub apex n-1 joined to an (n-1)-cycle rim; only the rim is embedded.

    Rim edges are cheap and spokes expensive, so spanning-tree fragments
    grow along the rim: the low-diameter hub only helps through shortcuts.
    """
    if n < 4:
        raise GraphError("wheel needs n >= 4")
    rim = n - 1
    edges = [(i, (i + 1) % rim, 1) for i in range(rim)]
    spokes = [(i, rim, 1000) for i in range(rim)]
    all_edges = edges + spokes
    if rng is not None:
        cheap = rng.sample(range(1, 10 * rim + 1), rim)
        dear = rng.sample(range(100 * rim, 200 * rim), rim)
        all_edges = [(u, v, w) for (u, v, _), w in zip(edges, cheap)] + [
            (u, v, w) for (u, v, _), w in zip(spokes, dear)
        ]
    rotation: list[tuple[int, ...] | None] = []
    for i in range(rim):
        rotation.append(((i - 1) % rim, i))
    rotation.append(None)
    return AnnotatedGraph.build(n, all_edges, rotation=rotation, apices=[rim])


def stacked_triangulation(n: int, rng: random.Random) -> AnnotatedGraph:
    """Random planar triangulation by repeated face subdivision.

    Faces are tracked incrementally (each subdivision replaces one face by
    three), so generation is near-linear and the rotation system is correct
    by construction.
    """
    if n < 3:
        raise GraphError("triangulation needs n >= 3")
    edges: list[tuple[int, int]] = [(0, 1), (1, 2), (0, 2)]
    rot: list[list[int]] = [[0, 2], [0, 1], [1, 2]]
    # dart = (edge id, head); start with the two triangle faces
    faces: list[list[tuple[int, int]]] = [
        [(0, 1), (1, 2), (2, 0)],
        [(2, 2), (1, 1), (0, 0)],
    ]
    nv = 3
    while nv < n:
        fi = rng.randrange(len(faces))
        face = faces[fi]
        x = nv
        nv += 1
        rot.append([])
        star: list[int] = []
        for eid, head in face:
            ne = len(edges)
            edges.append((head, x) if head < x else (x, head))
            r = rot[head]
            r.insert(r.index(eid) + 1, ne)
            star.append(ne)
        rot[x] = list(reversed(star))
        k = len(face)
        new_faces = []
        for i in range(k):
            j = (i + 1) % k
            new_faces.append([(star[i], face[i][1]), face[j], (star[j], x)])
        faces[fi] = new_faces[0]
        faces.extend(new_faces[1:])
    ws = _weights(rng, len(edges))
    return AnnotatedGraph.build(
        nv, [(u, v, w) for (u, v), w in zip(edges, ws)], rotation=[tuple(r) for r in rot]
    )


def add_apices(g: AnnotatedGraph, q: int, attach: int, rng: random.Random) -> AnnotatedGraph:
    """Append q apex vertices, each joined to `attach` random base vertices.

    Vortex internals are skipped as targets: internal neighborhoods stay
    confined to their arcs.
    """
    edges = list(g.edges)
    rotation = list(g.rotation) if g.rotation is not None else None
    apices = list(g.apices)
    pool = sorted(set(range(g.n)) - set(g.vortex_internal_ids))
    n = g.n
    for _ in range(q):
        x = n
        n += 1
        targets = rng.sample(pool, min(attach, len(pool)))
        for tgt in sorted(targets):
            edges.append((tgt, x, 1))
        for prev in apices:
            edges.append((min(prev, x), max(prev, x), 1))
        apices.append(x)
        if rotation is not None:
            rotation.append(None)
    ws = _weights(rng, len(edges))
    edges = [(u, v, w) for (u, v, _), w in zip(edges, ws)]
    return AnnotatedGraph.build(n, edges, rotation=rotation, apices=apices, vortices=g.vortices)


def add_vortex(
    g: AnnotatedGraph,
    internals: int,
    depth: int,
    arc_len: int,
    rng: random.Random,
) -> AnnotatedGraph:
    """Attach a vortex of the given depth to the longest face of g."""
    emb = g.embedding()
    if emb is None:
        raise GraphError("vortex host needs a rotation system")
    boundary = emb.face_vertices(emb.outer)
    if len(set(boundary)) != len(boundary):
        raise GraphError("outer face is not a simple cycle")
    m = len(boundary)
    arc_len = max(2, min(arc_len, m))
    usage = {b: 0 for b in range(m)}
    arcs: list[tuple[int, int]] = []
    attempts = 0
    while len(arcs) < internals and attempts < 50 * internals:
        attempts += 1
        lo = rng.randrange(m)
        hi = (lo + arc_len - 1) % m
        span = [(lo + i) % m for i in range(arc_len)]
        if any(usage[p] + 1 > depth for p in span):
            continue
        for p in span:
            usage[p] += 1
        arcs.append((lo, hi))
    if len(arcs) < internals:
        raise GraphError("could not place vortex arcs within the depth budget")
    n = g.n
    edges = list(g.edges)
    rotation = list(g.rotation) if g.rotation is not None else None
    internal_specs = []
    ids = []
    for lo, hi in arcs:
        v = n
        n += 1
        ids.append(v)
        internal_specs.append((v, (lo, hi)))
        span = [(lo + i) % m for i in range(arc_len)]
        picks = sorted(rng.sample(span, max(1, min(2, len(span)))))
        for p in picks:
            edges.append((min(boundary[p], v), max(boundary[p], v), 1))
        if rotation is not None:
            rotation.append(None)
    # connect internals whose arcs overlap (deterministic order)
    for i in range(len(arcs)):
        for j in range(i + 1, len(arcs)):
            si = {(arcs[i][0] + t) % m for t in range(arc_len)}
            sj = {(arcs[j][0] + t) % m for t in range(arc_len)}
            if si & sj:
                edges.append((min(ids[i], ids[j]), max(ids[i], ids[j]), 1))
    ws = _weights(rng, len(edges))
    edges = [(u, v, w) for (u, v, _), w in zip(edges, ws)]
    vortex = VortexSpec(
        boundary=tuple(boundary), internals=tuple(internal_specs), depth=depth
    )
    return AnnotatedGraph.build(
        n, edges, rotation=rotation, apices=g.apices, vortices=tuple(g.vortices) + (vortex,)
    )


# -- default partitions -----------------------------------------------------------


def voronoi_parts(g: AnnotatedGraph, count: int, rng: random.Random) -> Partition:
    """Connected parts by multi-source BFS claiming from spread-out seeds."""
    count = max(1, min(count, g.n))
    seeds = [rng.randrange(g.n)]
    while len(seeds) < count:
        dist: dict[int, int] = {}
        for s in seeds:
            for v, d in bfs_distances(g, s).items():
                if v not in dist or d < dist[v]:
                    dist[v] = d
        far = max(range(g.n), key=lambda v: (dist.get(v, 0), -v))
        if far in seeds:
            break
        seeds.append(far)
    owner: dict[int, int] = {}
    frontier = deque()
    for i, s in enumerate(seeds):
        owner[s] = i
        frontier.append(s)
    while frontier:
        v = frontier.popleft()
        for u, _eid in g.adjacency[v]:
            if u not in owner:
                owner[u] = owner[v]
                frontier.append(u)
    groups: dict[int, set[int]] = {}
    for v, i in owner.items():
        groups.setdefault(i, set()).add(v)
    parts = [frozenset(groups[i]) for i in sorted(groups)]
    return Partition(parts=tuple(parts))


def _grid_quadrants(k: int) -> Partition:
    half = k // 2
    quads: list[set[int]] = [set(), set(), set(), set()]
    for r in range(k):
        for c in range(k):
            idx = (0 if r < half else 2) + (0 if c < half else 1)
            quads[idx].add(r * k + c)
    return Partition(parts=tuple(frozenset(q) for q in quads if q))


# -- clique-sum families ------------------------------------------------------------


def _cliquesum_build(
    nbags: int, k: int, rng: random.Random, shape: str
) -> tuple[AnnotatedGraph, CliqueSumTree]:
    """Glue K_{k+1} bags along k-cliques with some glue edges deleted.

    shape: 'chain' glues each bag to the previous one, 'caterpillar'
    alternates spine/leg, 'random' picks a random existing bag.
    """
    if k < 1 or nbags < 1:
        raise GraphError("need k >= 1 and bags >= 1")
    bag_verts: list[list[int]] = []
    edges: set[tuple[int, int]] = set()
    links: list[tuple[int, int, tuple[frozenset[int], ...]]] = []
    first = list(range(k + 1))
    bag_verts.append(first)
    n = k + 1
    for i, a in enumerate(first):
        for b in first[i + 1 :]:
            edges.add((a, b))
    spine_end = 0
    for bi in range(1, nbags):
        if shape == "chain":
            host = bi - 1
        elif shape == "caterpillar":
            host = spine_end
            if bi % 2 == 0:
                spine_end = bi
        else:
            host = rng.randrange(bi)
        glue = sorted(rng.sample(bag_verts[host], k))
        fresh = [n]
        n += 1
        verts = glue + fresh
        bag_verts.append(verts)
        for i, a in enumerate(verts):
            for b in verts[i + 1 :]:
                e = (min(a, b), max(a, b))
                edges.add(e)
        # delete some glue-internal edges, keeping the graph connected
        for i, a in enumerate(glue):
            for b in glue[i + 1 :]:
                if rng.random() < 0.3:
                    edges.discard((min(a, b), max(a, b)))
        links.append((host, bi, (frozenset(glue),)))
    ws = _weights(rng, len(edges))
    elist = [(u, v, w) for (u, v), w in zip(sorted(edges), ws)]
    g = AnnotatedGraph.build(n, elist)
    cst = CliqueSumTree.of([frozenset(b) for b in bag_verts], links, 0, k)
    return g, cst


def _half_split_parts(g: AnnotatedGraph, cst: CliqueSumTree) -> Partition:
    """Two connected parts: vertices of the first half of the bags vs the rest."""
    nb = len(cst.bags)
    first = set()
    for b in range(nb // 2 + 1):
        first |= cst.bags[b]
    rest = set(range(g.n)) - first
    parts = [frozenset(first)]
    if rest:
        comps = []
        left = set(rest)
        while left:
            s = min(left)
            comp = {s}
            dq = deque([s])
            while dq:
                x = dq.popleft()
                for y, _e in g.adjacency[x]:
                    if y in left and y not in comp:
                        comp.add(y)
                        dq.append(y)
            comps.append(frozenset(comp))
            left -= comp
        parts.extend(comps)
    return Partition(parts=tuple(parts))


# -- family entry points ---------------------------------------------------------------


def _gen_grid(spec: FamilySpec) -> GeneratedInstance:
    k = spec.parameters.get("k", 4)
    rng = random.Random(spec.seed)
    g = grid_graph(k, rng)
    return GeneratedInstance(spec=spec, graph=g, parts=_grid_quadrants(k))


def _gen_cycle(spec: FamilySpec) -> GeneratedInstance:
    n = spec.parameters.get("n", 8)
    rng = random.Random(spec.seed)
    g = cycle_graph(n, rng)
    half = n // 2
    parts = Partition.of([range(0, half), range(half, n)])
    return GeneratedInstance(spec=spec, graph=g, parts=parts)


def _gen_wheel(spec: FamilySpec) -> GeneratedInstance:
    n = spec.parameters.get("n", 9)
    rng = random.Random(spec.seed)
    g = wheel_graph(n, rng)
    parts = Partition.of([range(n - 1)])  # the rim
    return GeneratedInstance(spec=spec, graph=g, parts=parts)


def _gen_random_planar(spec: FamilySpec) -> GeneratedInstance:
    n = spec.parameters.get("n", 32)
    pcount = spec.parameters.get("parts", max(2, min(4, n // 8)))
    rng = random.Random(spec.seed)
    g = stacked_triangulation(n, rng)
    parts = voronoi_parts(g, pcount, rng)
    return GeneratedInstance(spec=spec, graph=g, parts=parts)


def _gen_apexed(spec: FamilySpec) -> GeneratedInstance:
    n = spec.parameters.get("n", 32)
    q = spec.parameters.get("q", 1)
    attach = spec.parameters.get("attach", max(3, n // 8))
    base = spec.parameters.get("base_grid", 0)
    pcount = spec.parameters.get("parts", max(2, min(4, n // 8)))
    rng = random.Random(spec.seed)
    if base:
        host = grid_graph(base, rng)
    else:
        host = stacked_triangulation(n, rng)
    g = add_apices(host, q, attach, rng)
    base_parts = voronoi_parts(host, pcount, rng)
    return GeneratedInstance(spec=spec, graph=g, parts=base_parts)


def _gen_vortexed(spec: FamilySpec) -> GeneratedInstance:
    n = spec.parameters.get("n", 16)
    internals = spec.parameters.get("internals", 3)
    depth = spec.parameters.get("depth", 2)
    arc_len = spec.parameters.get("arc", 3)
    q = spec.parameters.get("q", 0)
    pcount = spec.parameters.get("parts", 2)
    rng = random.Random(spec.seed)
    host = cycle_graph(n, rng) if spec.parameters.get("base", 0) == 0 else grid_graph(n, rng)
    g = add_vortex(host, internals, depth, arc_len, rng)
    if q:
        g = add_apices(g, q, max(3, host.n // 4), rng)
    parts = voronoi_parts(host, pcount, rng)
    return GeneratedInstance(spec=spec, graph=g, parts=parts)


def _gen_cliquesum_chain(spec: FamilySpec) -> GeneratedInstance:
    bags = spec.parameters.get("bags", 8)
    k = spec.parameters.get("k", 2)
    rng = random.Random(spec.seed)
    g, cst = _cliquesum_build(bags, k, rng, "chain")
    return GeneratedInstance(spec=spec, graph=g, parts=_half_split_parts(g, cst), cliquesum=cst)


def _gen_cliquesum_tree(spec: FamilySpec) -> GeneratedInstance:
    bags = spec.parameters.get("bags", 8)
    k = spec.parameters.get("k", 2)
    shape = "caterpillar" if spec.parameters.get("caterpillar", 0) else "random"
    rng = random.Random(spec.seed)
    g, cst = _cliquesum_build(bags, k, rng, shape)
    return GeneratedInstance(spec=spec, graph=g, parts=_half_split_parts(g, cst), cliquesum=cst)


_GENERATORS: dict[str, Callable[[FamilySpec], GeneratedInstance]] = {
    "grid": _gen_grid,
    "cycle": _gen_cycle,
    "wheel": _gen_wheel,
    "random_planar": _gen_random_planar,
    "apexed_planar": _gen_apexed,
    "planar_with_vortex": _gen_vortexed,
    "cliquesum_chain": _gen_cliquesum_chain,
    "cliquesum_tree": _gen_cliquesum_tree,
}
