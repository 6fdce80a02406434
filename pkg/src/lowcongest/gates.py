"""Cell partitions, combinatorial gates, and the cell-assignment relation.

A cell partition splits the non-apex vertices into low-diameter connected
cells.  For every pair of adjacent cells we construct a closed cycle through
two extremal inter-cell edges; the regions these cycles enclose form a
laminar family of face sets, and the (fence, gate) pairs carved out of them
cover all inter-cell edges while keeping total fence size at most
36(d+1) per cell.  Gates certify that either some part meets at most two
cells or some cell meets few parts, which drives the recursion that assigns
cells to parts.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

from .graph import (
    AnnotatedGraph,
    Embedding,
    EmbeddingError,
    GraphError,
    RootedTree,
    bfs_distances,
    contract_outside,
    face_of_boundary,
    induced_center,
    induced_diameter,
    insert_vertex_in_face,
    subtree_bfs_tree,
)
from .shortcuts import Partition


class GateError(ValueError):
    pass


FENCE_FACTOR = 36  # certified average fence size is FENCE_FACTOR * (d + 1)


@dataclass(frozen=True)
class CellPartition:
    """Disjoint connected vertex cells covering the non-apex vertices.

    ``diameter`` is the maximum induced diameter over all cells.  Special
    cells are the ones holding whole vortices (plus their star vertices).
    """

    cells: tuple[frozenset[int], ...]
    special: tuple[bool, ...]
    diameter: int

    @staticmethod
    def of(g: AnnotatedGraph, cells: Sequence[Iterable[int]], special: Sequence[bool] | None = None) -> "CellPartition":
        cs = tuple(frozenset(c) for c in cells)
        sp = tuple(special) if special is not None else tuple(False for _ in cs)
        diam = max((induced_diameter(g, c) for c in cs), default=0)
        return CellPartition(cells=cs, special=sp, diameter=diam)

    @property
    def special_count(self) -> int:
        return sum(1 for s in self.special if s)

    def cell_of_map(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for i, c in enumerate(self.cells):
            for v in c:
                out[v] = i
        return out


def validate_cells(g: AnnotatedGraph, cp: CellPartition, exclude: Iterable[int] = ()) -> list[str]:
    """Disjointness, connectivity, and coverage of V minus the excluded set."""
    bad: list[str] = []
    seen: dict[int, int] = {}
    for i, cell in enumerate(cp.cells):
        if not cell:
            bad.append(f"cell {i} is empty")
            continue
        for v in cell:
            if v in seen:
                bad.append(f"cells {seen[v]} and {i} overlap at {v}")
            seen[v] = i
        if len(bfs_distances(g, min(cell), within=cell)) != len(cell):
            bad.append(f"cell {i} induces a disconnected subgraph")
    want = set(range(g.n)) - set(exclude)
    uncovered = want - set(seen)
    if uncovered:
        bad.append(f"vertex {min(uncovered)} in no cell")
    return bad


@dataclass(frozen=True)
class CombinatorialGate:
    """(fence, gate) vertex-set pairs with a certified average fence size."""

    pairs: tuple[tuple[frozenset[int], frozenset[int]], ...]
    s_param: int


@dataclass(frozen=True)
class CellRelation:
    """Relation between cell indices and part indices with degree bound beta."""

    pairs: frozenset[tuple[int, int]]
    beta: int


# ---------------------------------------------------------------------------
# Cells from apex removal, vortex merging
# ---------------------------------------------------------------------------


def cells_from_apex_removal(g: AnnotatedGraph, t: RootedTree, apex: int) -> CellPartition:
    """Each connected subtree of the spanning tree minus the apex is a cell."""
    if not t.covers(apex):
        raise GraphError(f"apex {apex} not covered by the tree")
    comp: dict[int, int] = {}
    nxt = 0
    for v in sorted(t.covered):
        if v == apex or v in comp:
            continue
        # walk up toward a known component or a fresh root segment
        trail = [v]
        p = t.parent[v]
        while p is not None and p != apex and p not in comp:
            trail.append(p)
            p = t.parent[p]
        if p is None or p == apex:
            label = nxt
            nxt += 1
        else:
            label = comp[p]
        for x in trail:
            comp[x] = label
    cells: dict[int, set[int]] = {}
    for v, c in comp.items():
        cells.setdefault(c, set()).add(v)
    ordered = [frozenset(cells[c]) for c in sorted(cells, key=lambda c: min(cells[c]))]
    return CellPartition.of(g, ordered)


def merge_vortex_cells(
    g: AnnotatedGraph, cp: CellPartition
) -> tuple[AnnotatedGraph, CellPartition, tuple[int, ...]]:
    """Merge cells sharing a vortex into one special cell and star each vortex.

    Every cell containing an internal vertex of a vortex merges with the
    others containing that vortex; one embedded star vertex per (non-empty)
    vortex is added to the graph inside the vortex face and joins the merged
    cell, keeping its diameter small.  Normal cells are untouched.
    """
    if not g.vortices:
        return g, cp, ()
    owner = cp.cell_of_map()
    groups = list(range(len(cp.cells)))

    def find(i: int) -> int:
        while groups[i] != i:
            groups[i] = groups[groups[i]]
            i = groups[i]
        return i

    vortex_cells: list[int | None] = []
    for vx in g.vortices:
        touched = sorted({find(owner[v]) for v in vx.internal_ids if v in owner})
        if not touched:
            vortex_cells.append(None)
            continue
        base = touched[0]
        for other in touched[1:]:
            groups[find(other)] = base
        vortex_cells.append(base)

    g2 = g
    stars: list[int] = []
    star_cell: list[tuple[int, int]] = []
    for vi, vx in enumerate(g.vortices):
        if vortex_cells[vi] is None:
            continue
        face = face_of_boundary(g2, tuple(vx.boundary))
        g2, star = insert_vertex_in_face(g2, face)
        stars.append(star)
        star_cell.append((star, vortex_cells[vi]))

    merged: dict[int, set[int]] = {}
    was_special: dict[int, bool] = {}
    special_groups = {find(c) for c in vortex_cells if c is not None}
    for i, cell in enumerate(cp.cells):
        rep = find(i)
        merged.setdefault(rep, set()).update(cell)
        was_special[rep] = was_special.get(rep, False) or cp.special[i]
    for star, cell_idx in star_cell:
        merged[find(cell_idx)].add(star)
    order = sorted(merged, key=lambda idx: min(merged[idx]))
    cells = [frozenset(merged[idx]) for idx in order]
    special = [idx in special_groups or was_special[idx] for idx in order]
    return g2, CellPartition.of(g2, cells, special), tuple(stars)





# ---------------------------------------------------------------------------
# Planar gate construction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GateConstruction:
    """Gate plus the cycles and enclosed face sets behind it, for audits."""

    gate: CombinatorialGate
    cycles: dict[tuple[int, int], tuple[int, ...]]  # cell pair -> cycle vertices
    regions: dict[tuple[int, int], frozenset[int]]  # cell pair -> enclosed faces


def build_planar_gate(g: AnnotatedGraph, cp: CellPartition) -> CombinatorialGate:
    return build_planar_gate_detailed(g, cp).gate


def build_planar_gate_detailed(g: AnnotatedGraph, cp: CellPartition) -> GateConstruction:
    """Gate for a fully embedded graph partitioned into cells.

    Per adjacent cell pair, extremal inter-cell edges are read off the outer
    face of the two cell trees plus their inter-cell edges; the cycle through
    them (at most 4d+2 vertices) encloses all edges of the pair, and the
    enclosed face sets form a laminar family.  Gates are the vertices owned
    by a cycle's region minus nested interiors; fences are the gate vertices
    on the bounding cycles or otherwise exposed.
    """
    emb = g.embedding()
    if emb is None:
        raise EmbeddingError("rotation system required")
    if len(g.embedded_edges) != len(g.edges):
        raise EmbeddingError("graph is not fully embedded")
    for v in range(g.n):
        if not g.is_embedded_vertex(v) and g.adjacency[v]:
            raise EmbeddingError(f"vertex {v} is not embedded")

    cells = cp.cells
    d = cp.diameter
    s_param = FENCE_FACTOR * (d + 1)
    if len(cells) <= 1:
        return GateConstruction(
            gate=CombinatorialGate(pairs=(), s_param=s_param), cycles={}, regions={}
        )

    cell_of = cp.cell_of_map()
    inter: dict[tuple[int, int], list[int]] = {}
    for eid, (u, v, _w) in enumerate(g.edges):
        cu, cv = cell_of.get(u), cell_of.get(v)
        if cu is None or cv is None or cu == cv:
            continue
        key = (cu, cv) if cu < cv else (cv, cu)
        inter.setdefault(key, []).append(eid)
    if len(cells) >= 3 and len(inter) > 3 * len(cells) - 6:
        raise GateError("adjacent cell pairs exceed the planar bound")

    trees: dict[int, RootedTree] = {}
    for idx in sorted({i for key in inter for i in key}):
        trees[idx] = subtree_bfs_tree(g, cells[idx], induced_center(g, cells[idx]))

    face_adj = _dual_adjacency(emb)
    cycles: dict[tuple[int, int], tuple[tuple[int, ...], frozenset[int]]] = {}
    regions: dict[tuple[int, int], frozenset[int]] = {}
    for key in sorted(inter):
        i, j = key
        eids = sorted(inter[key])
        choice = _extremal_edges(g, emb, trees[i], trees[j], eids)
        picked = None
        for eL, eR in choice:
            verts, kedges = _gate_cycle(g, cell_of, trees[i], trees[j], eL, eR)
            reg = _region_faces(emb, kedges, face_adj)
            if _encloses(emb, eids, kedges, reg):
                picked = (verts, kedges, reg)
                break
        if picked is None:
            raise GateError(f"no enclosing extremal cycle for cell pair {key}")
        verts, kedges, reg = picked
        if len(verts) > 4 * d + 2:
            raise GateError(f"cycle for pair {key} has {len(verts)} > 4d+2 vertices")
        cycles[key] = (verts, kedges)
        regions[key] = reg

    _check_laminar(regions)

    pairs: list[tuple[frozenset[int], frozenset[int]]] = []
    keys = sorted(regions)
    nonempty = [k for k in keys if regions[k]]
    degenerate = [k for k in keys if not regions[k]]  # single-edge cycles
    for key in keys:
        verts, kedges = cycles[key]
        reg = regions[key]
        nested = [k2 for k2 in nonempty if k2 != key and regions[k2] < reg] if reg else []
        own_faces = set(reg)
        for k2 in nested:
            own_faces -= regions[k2]
        cyc_set = set(verts)
        nested_cyc: set[int] = set()
        for k2 in nested:
            nested_cyc |= set(cycles[k2][0])
        if reg:
            # a degenerate (area-free) cycle inside the region still bounds
            # the owned set, so its endpoints must land in the fence
            for k2 in degenerate:
                if k2 == key:
                    continue
                v2, ke2 = cycles[k2]
                eid2 = next(iter(ke2))
                a, b = emb.edge_sides[eid2]
                if a in reg and b in reg:
                    nested_cyc |= set(v2)
        i, j = key
        members = cells[i] | cells[j]
        S: set[int] = set()
        for v in sorted(members):
            if v in cyc_set:
                S.add(v)
                continue
            vf = emb.vertex_faces.get(v, frozenset())
            if not vf or not vf <= reg:
                continue
            strictly_in_nested = False
            for k2 in nested:
                if v not in cycles[k2][0] and vf <= regions[k2]:
                    strictly_in_nested = True
                    break
            if not strictly_in_nested:
                S.add(v)
        F: set[int] = set()
        for v in S:
            vf = emb.vertex_faces.get(v, frozenset())
            if v in cyc_set or v in nested_cyc or not vf <= own_faces:
                F.add(v)
        # the graph boundary of the gate always belongs to the fence
        for v in S - F:
            if any(u not in S for u, _e in g.adjacency[v]):
                F.add(v)
        pairs.append((frozenset(F), frozenset(S)))

    gate = CombinatorialGate(pairs=tuple(pairs), s_param=s_param)
    total_f = sum(len(f) for f, _s in pairs)
    if total_f > s_param * len(cells):
        raise GateError(f"total fence size {total_f} exceeds {s_param} * |cells|")
    return GateConstruction(
        gate=gate,
        cycles={k: cycles[k][0] for k in cycles},
        regions=dict(regions),
    )


def _extremal_edges(
    g: AnnotatedGraph,
    emb: Embedding,
    ti: RootedTree,
    tj: RootedTree,
    eids: list[int],
) -> list[tuple[int, int]]:
    """Candidate extremal pairs: the first/last inter-cell edges on the outer
    face of the two-tree subgraph first, then every pair as a fallback."""
    if len(eids) == 1:
        return [(eids[0], eids[0])]
    sub_edges = set(eids)
    for u, v in ti.edge_pairs | tj.edge_pairs:
        sub_edges.add(g.edge_id(u, v))
    # classes of host faces under deletion of everything outside the subgraph
    parent = list(range(len(emb.faces)))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for eid in g.embedded_edges:
        if eid in sub_edges:
            continue
        a, b = emb.edge_sides[eid]
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    outer_class = find(emb.outer)

    # traverse the subgraph's faces with filtered rotations
    verts = set(ti.covered) | set(tj.covered)
    rots: dict[int, list[int]] = {}
    pos: dict[tuple[int, int], int] = {}
    for v in verts:
        rot = [e for e in g.rotation[v] if e in sub_edges]  # type: ignore[index]
        rots[v] = rot
        for k, e in enumerate(rot):
            pos[(e, v)] = k
    darts = []
    for e in sorted(sub_edges):
        u, v, _w = g.edges[e]
        darts.append((e, v))
        darts.append((e, u))
    seen: set[tuple[int, int]] = set()
    order: list[int] = []
    for start in darts:
        if start in seen:
            continue
        walk = []
        dd = start
        while True:
            seen.add(dd)
            walk.append(dd)
            e, head = dd
            rot = rots[head]
            nxt = rot[(pos[(e, head)] + 1) % len(rot)]
            dd = (nxt, g.other(nxt, head))
            if dd == start:
                break
        host_face = emb.dart_face[walk[0]]
        if find(host_face) == outer_class:
            for e, _head in walk:
                if e in set(eids):
                    order.append(e)
            break
    cands: list[tuple[int, int]] = []
    if order:
        first, last = order[0], order[-1]
        if first != last:
            cands.append((first, last))
        else:
            distinct = sorted(set(order))
            if len(distinct) == 1:
                cands.append((first, first))
    for a_i, a in enumerate(eids):
        for b in eids[a_i:]:
            if (a, b) not in cands:
                cands.append((a, b))
    return cands


def _gate_cycle(
    g: AnnotatedGraph,
    cell_of: Mapping[int, int],
    ti: RootedTree,
    tj: RootedTree,
    eL: int,
    eR: int,
) -> tuple[tuple[int, ...], frozenset[int]]:
    """Closed cycle through two inter-cell edges and the two cell tree paths."""
    if eL == eR:
        u, v, _w = g.edges[eL]
        return (u, v), frozenset([eL])
    ends_i = []
    ends_j = []
    for e in (eL, eR):
        u, v, _w = g.edges[e]
        if ti.covers(u):
            ends_i.append(u)
            ends_j.append(v)
        else:
            ends_i.append(v)
            ends_j.append(u)
    path_i = ti.tree_path(ends_i[0], ends_i[1])
    path_j = tj.tree_path(ends_j[1], ends_j[0])
    verts = tuple(path_i + path_j)
    kedges = {eL, eR}
    for a, b in zip(path_i, path_i[1:]):
        kedges.add(g.edge_id(a, b))
    for a, b in zip(path_j, path_j[1:]):
        kedges.add(g.edge_id(a, b))
    return verts, frozenset(kedges)


def _dual_adjacency(emb: Embedding) -> list[list[tuple[int, int]]]:
    """Per face, the (edge id, neighboring face) incidences."""
    adj: list[list[tuple[int, int]]] = [[] for _ in emb.faces]
    for eid, (a, b) in emb.edge_sides.items():
        if a == b:
            continue
        adj[a].append((eid, b))
        adj[b].append((eid, a))
    return adj


def _region_faces(
    emb: Embedding, kedges: frozenset[int], face_adj: list[list[tuple[int, int]]]
) -> frozenset[int]:
    """Faces enclosed by the cycle: unreachable from the outer face in the
    dual graph once the cycle's edges are blocked.  A single edge never
    separates the sphere, so one-edge cycles enclose nothing."""
    if len(kedges) <= 1:
        return frozenset()
    nf = len(emb.faces)
    seen = [False] * nf
    seen[emb.outer] = True
    q = deque([emb.outer])
    while q:
        f = q.popleft()
        for eid, t in face_adj[f]:
            if eid not in kedges and not seen[t]:
                seen[t] = True
                q.append(t)
    return frozenset(i for i in range(nf) if not seen[i])


def _encloses(emb: Embedding, eids: list[int], kedges: frozenset[int], reg: frozenset[int]) -> bool:
    for e in eids:
        if e in kedges:
            continue
        a, b = emb.edge_sides[e]
        if a not in reg or b not in reg:
            return False
    return True


def _check_laminar(regions: Mapping[tuple[int, int], frozenset[int]]) -> None:
    keys = sorted(k for k in regions if regions[k])  # empty regions nest everywhere
    for x in range(len(keys)):
        for y in range(x + 1, len(keys)):
            a, b = regions[keys[x]], regions[keys[y]]
            inter = a & b
            if inter and inter != a and inter != b:
                raise GateError(f"regions of pairs {keys[x]} and {keys[y]} are not laminar")


# ---------------------------------------------------------------------------
# Gate verification and vortex expansion
# ---------------------------------------------------------------------------


def verify_gate(
    g: AnnotatedGraph,
    cp: CellPartition,
    gate: CombinatorialGate,
    ignore: Iterable[int] = (),
) -> list[str]:
    """Check the six gate properties; violations come back as data.

    ``ignore`` lists auxiliary vertices (stars) excluded from edge coverage
    and boundary computations.
    """
    bad: list[str] = []
    ignore_set = set(ignore)
    cell_of = cp.cell_of_map()
    for idx, (fence, gset) in enumerate(gate.pairs):
        if not fence <= gset:
            bad.append(f"pair {idx}: property 1 violated (fence not inside gate)")
        boundary = set()
        for v in gset:
            if v in ignore_set:
                continue
            for u, _eid in g.adjacency[v]:
                if u not in gset and u not in ignore_set:
                    boundary.add(v)
                    break
        if not boundary <= fence:
            miss = min(boundary - fence)
            bad.append(f"pair {idx}: property 2 violated (boundary vertex {miss} outside fence)")
        touched = {cell_of[v] for v in gset if v in cell_of}
        if len(touched) > 2:
            bad.append(f"pair {idx}: property 4 violated (gate meets {len(touched)} cells)")
    for eid, (u, v, _w) in enumerate(g.edges):
        if u in ignore_set or v in ignore_set:
            continue
        cu, cv = cell_of.get(u), cell_of.get(v)
        if cu is None or cv is None or cu == cv:
            continue
        if not any(u in gset and v in gset for _f, gset in gate.pairs):
            bad.append(f"property 3 violated (inter-cell edge {u}-{v} uncovered)")
    claimed: dict[int, int] = {}
    for idx, (fence, gset) in enumerate(gate.pairs):
        for v in gset - fence:
            if v in claimed:
                bad.append(
                    f"property 5 violated (vertex {v} non-fence in pairs {claimed[v]} and {idx})"
                )
            claimed[v] = idx
    total_f = sum(len(f) for f, _s in gate.pairs)
    ncells = max(1, len(cp.cells))
    if total_f > gate.s_param * ncells:
        bad.append(
            f"property 6 violated (total fence {total_f} > s * |cells| = {gate.s_param * ncells})"
        )
    return bad


def expand_gate_over_vortices(
    gate: CombinatorialGate, g: AnnotatedGraph, stars: Iterable[int] = ()
) -> CombinatorialGate:
    """Expand a gate built on the star-replaced host back over the vortices.

    Stars map to nothing; a vortex-boundary vertex maps to itself plus every
    internal vertex whose arc contains it; everything else maps to itself.
    The certified fence parameter scales by the maximum vortex depth.
    """
    if not g.vortices:
        return gate
    star_set = set(stars)
    expand: dict[int, frozenset[int]] = {}
    for vx in g.vortices:
        for b, holders in vx.arcs_by_boundary_vertex().items():
            cur = expand.get(b, frozenset([b]))
            expand[b] = cur | frozenset(holders)
    for s in star_set:
        expand[s] = frozenset()

    def emap(vs: frozenset[int]) -> frozenset[int]:
        out: set[int] = set()
        for v in vs:
            out |= expand.get(v, frozenset([v]))
        return frozenset(out)

    kmax = max(vx.depth for vx in g.vortices)
    pairs = tuple((emap(f), emap(s)) for f, s in gate.pairs)
    return CombinatorialGate(pairs=pairs, s_param=gate.s_param * kmax)


# ---------------------------------------------------------------------------
# Cell assignment
# ---------------------------------------------------------------------------

GateBuilder = Callable[[AnnotatedGraph, CellPartition, frozenset[int]], CombinatorialGate]


def planar_gate_builder(g: AnnotatedGraph, cp: CellPartition, stars: frozenset[int]) -> CombinatorialGate:
    if cp.special_count:
        raise GateError("special cells present; use the vortex-aware builder")
    return build_planar_gate(g, cp)


def vortex_gate_builder(g: AnnotatedGraph, cp: CellPartition, stars: frozenset[int]) -> CombinatorialGate:
    """Gate for a planar-with-vortex graph: delete the internals, build the
    planar gate on the starred host, then expand back over the vortices."""
    internals = g.vortex_internal_ids
    if not internals:
        return build_planar_gate(g, cp)
    keep = sorted(set(range(g.n)) - internals)
    sg, vmap = induced_subgraph(g, keep)
    sg_cells = []
    for c in cp.cells:
        sg_cells.append(frozenset(vmap[v] for v in c if v not in internals))
    sg_cp = CellPartition.of(sg, sg_cells, cp.special)
    sg_gate = build_planar_gate(sg, sg_cp)
    inv = {new: old for old, new in vmap.items()}
    back = tuple(
        (frozenset(inv[v] for v in f), frozenset(inv[v] for v in s)) for f, s in sg_gate.pairs
    )
    return expand_gate_over_vortices(
        CombinatorialGate(pairs=back, s_param=sg_gate.s_param), g, stars
    )


def induced_subgraph(g: AnnotatedGraph, keep: Sequence[int]) -> tuple[AnnotatedGraph, dict[int, int]]:
    """Delete every vertex outside ``keep`` (no contraction), relabeling."""
    keep = sorted(keep)
    new_id = {old: i for i, old in enumerate(keep)}
    keep_set = set(keep)
    edges = []
    emap: dict[int, int] = {}
    for eid, (u, v, w) in enumerate(g.edges):
        if u in keep_set and v in keep_set:
            emap[eid] = len(edges)
            edges.append((new_id[u], new_id[v], w))
    rot = None
    if g.rotation is not None:
        rot = []
        for old in keep:
            r = g.rotation[old]
            rot.append(None if r is None else tuple(emap[e] for e in r if e in emap))
    vortices = []
    for vx in g.vortices:
        touched = set(vx.boundary) | set(vx.internal_ids)
        if touched <= keep_set:
            vortices.append(
                type(vx)(
                    boundary=tuple(new_id[b] for b in vx.boundary),
                    internals=tuple((new_id[v], arc) for v, arc in vx.internals),
                    depth=vx.depth,
                )
            )
    out = AnnotatedGraph(
        n=len(keep),
        edges=tuple(edges),
        rotation=tuple(rot) if rot is not None else None,
        apices=tuple(sorted(new_id[a] for a in g.apices if a in keep_set)),
        vortices=tuple(vortices),
    )
    return out, new_id


def assign_cells(
    g: AnnotatedGraph,
    cp: CellPartition,
    parts: Partition,
    gate_builder: GateBuilder | None = None,
    stars: Iterable[int] = (),
    rebuild_gate_each_step: bool = False,
    contract_each_step: bool | None = None,
) -> CellRelation:
    """Relate cells to parts so each part misses at most two of the normal
    cells it meets and each cell serves at most beta parts.

    Repeatedly: a part meeting at most two cells is dropped unassigned; else
    the lowest-indexed qualifying (normal) cell is related to every part it
    meets and contracted away, with contractions following part edges so the
    remaining incidences are untouched.  The degree threshold 2s (2*l*s with
    l special cells) comes from the gate of the initial graph; with a valid
    gate available at every step a qualifying cell always exists.

    Because contraction preserves both part connectivity and the remaining
    incidences, the relation is the same whether or not the intermediate
    graphs are materialized; ``contract_each_step`` (on by default only when
    each step's gate is rebuilt) keeps the recursion cheap on large hosts.
    The gate itself is only certification for the degree threshold, so it is
    built lazily at the first cell pick.
    """
    ell = cp.special_count
    if gate_builder is None:
        gate_builder = vortex_gate_builder if ell else planar_gate_builder
    if contract_each_step is None:
        contract_each_step = rebuild_gate_each_step
    stars_cur = frozenset(stars)
    s_formula = FENCE_FACTOR * (cp.diameter + 1)
    if g.vortices and ell:
        s_formula *= max(vx.depth for vx in g.vortices)
    thr = 2 * max(1, ell) * s_formula
    beta = thr
    gate_built = False
    if rebuild_gate_each_step:
        gate = gate_builder(g, cp, stars_cur)
        if gate.s_param > s_formula:
            raise GateError("gate certifies a larger s than the partition allows")
        gate_built = True

    W = g
    cells: dict[int, set[int]] = {i: set(c) for i, c in enumerate(cp.cells)}
    special = dict(enumerate(cp.special))
    pstate: dict[int, set[int]] = {i: set(p) for i, p in enumerate(parts.parts)}
    alive = {i for i, p in pstate.items() if p}

    # Incidences survive contraction untouched, so compute them once and
    # maintain them incrementally as parts drop and cells get picked.
    inc_part: dict[int, set[int]] = {i: set() for i in alive}
    inc_cell: dict[int, set[int]] = {c: set() for c in cells}
    for c, cv in cells.items():
        for i in alive:
            if cv & pstate[i]:
                inc_part[i].add(c)
                inc_cell[c].add(i)
    pairs: set[tuple[int, int]] = set()

    def drop_part(i: int) -> None:
        alive.discard(i)
        for c in inc_part.pop(i, ()):  # noqa: B020
            inc_cell[c].discard(i)

    while True:
        if not alive:
            break
        normals = sorted(c for c in cells if not special[c])
        if not normals:
            break
        normal_set = set(normals)
        droppable = sorted(
            i
            for i in alive
            if len(inc_part[i]) <= 2 or not (inc_part[i] & normal_set)
        )
        if droppable:
            drop_part(droppable[0])
            continue
        if len(alive) == 1:
            i = next(iter(alive))
            for c in sorted(inc_part[i] & normal_set):
                pairs.add((c, i))
            break
        if not gate_built:
            order0 = sorted(cells)
            cp0 = CellPartition.of(
                W, [frozenset(cells[c]) for c in order0], [special[c] for c in order0]
            )
            gate = gate_builder(W, cp0, stars_cur)
            if gate.s_param > s_formula:
                raise GateError("gate certifies a larger s than the partition allows")
            gate_built = True
        candidates = sorted(c for c in normals if len(inc_cell[c]) <= thr)
        if not candidates:
            raise GateError("no qualifying cell or part; gate certificate violated")
        c = candidates[0]
        for i in sorted(inc_cell[c]):
            pairs.add((c, i))
            inc_part[i].discard(c)
        if contract_each_step:
            keep = sorted(set(range(W.n)) - cells[c])
            live_parts = [frozenset(pstate[i]) for i in sorted(alive)]
            W, mp = contract_outside(W, keep, live_parts)
            keep_set = set(keep)
            for i in list(alive):
                pstate[i] = {mp[v] for v in pstate[i] if v in keep_set}
                if not pstate[i]:
                    drop_part(i)
            del cells[c]
            del inc_cell[c]
            for c2 in cells:
                cells[c2] = {mp[v] for v in cells[c2]}
            stars_cur = frozenset(mp[s] for s in stars_cur)
            if rebuild_gate_each_step and cells and any(not special[c] for c in cells):
                order = sorted(cells)
                cp_cur = CellPartition.of(
                    W, [frozenset(cells[c]) for c in order], [special[c] for c in order]
                )
                gate_builder(W, cp_cur, stars_cur)  # must still exist; threshold unchanged
        else:
            # a part picked here meets >= 3 cells, so it cannot vanish when
            # the cell contracts away; skipping the rebuild leaves the
            # relation untouched
            del cells[c]
            del inc_cell[c]

    return CellRelation(pairs=frozenset(pairs), beta=beta)


def verify_relation(
    cp: CellPartition, parts: Partition, rel: CellRelation
) -> list[str]:
    """Property checks: parts miss at most two intersected normal cells; cell
    degrees stay within beta; special cells stay unrelated."""
    bad: list[str] = []
    related_by_part: dict[int, set[int]] = {}
    deg_cell: dict[int, int] = {}
    for c, i in rel.pairs:
        related_by_part.setdefault(i, set()).add(c)
        deg_cell[c] = deg_cell.get(c, 0) + 1
        if cp.special[c]:
            bad.append(f"special cell {c} appears in the relation")
    for i, p in enumerate(parts.parts):
        met = {c for c, cell in enumerate(cp.cells) if not cp.special[c] and cell & p}
        missed = met - related_by_part.get(i, set())
        if len(missed) > 2:
            bad.append(f"part {i} misses {len(missed)} normal cells it meets")
    for c, deg in deg_cell.items():
        if deg > rel.beta:
            bad.append(f"cell {c} related to {deg} parts > beta={rel.beta}")
    return bad
