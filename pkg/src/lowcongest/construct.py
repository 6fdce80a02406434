"""Shortcut constructors: clique-sum, treewidth route, apex, and a dispatcher.

The clique-sum constructor assigns each part global shortcut edges from the
descendant bags below its lowest-common-ancestor bag and local edges inside
that bag over a repaired tree.  The treewidth route reads a tree
decomposition as a clique-sum tree with empty bag-local shortcuts.  The apex
constructor splits the spanning tree at the apex into cells, relates cells
to parts, hands related parts the whole cell subtree plus its uplink, and
handles leftovers with per-cell treewidth-route locals; vortices ride along
inside special cells handled jointly over the apex-rooted subtree.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .decomposition import (
    CliqueSumTree,
    TreeDecomposition,
    compress_cliquesum,
    minfill_decomposition,
    planar_tree_decomposition,
    td_to_cliquesum,
    vortex_tree_decomposition,
)
from .gates import (
    CellPartition,
    assign_cells,
    cells_from_apex_removal,
    induced_subgraph,
    merge_vortex_cells,
)
from .graph import (
    AnnotatedGraph,
    RootedTree,
    contract_outside,
    repaired_tree,
    tree_diameter,
)
from .shortcuts import Partition, Shortcut, validate_parts


class ConstructorError(ValueError):
    pass


DOUBLE_SPLIT_LIMIT = 5  # bag-restricted part components allowed under double edges


@dataclass(frozen=True)
class ConstructorConfig:
    method: str = "auto"  # cliquesum | treewidth | apex | auto
    compression: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.method not in ("cliquesum", "treewidth", "apex", "auto"):
            raise ConstructorError(f"unknown method {self.method!r}")


@dataclass(frozen=True)
class LocalContext:
    """What a bag-local shortcut builder gets to see."""

    graph: AnnotatedGraph
    bag: frozenset[int]
    repaired: RootedTree
    subparts: tuple[frozenset[int], ...]


LocalConstructor = Callable[[LocalContext], Sequence[frozenset[tuple[int, int]]]]


def empty_local(ctx: LocalContext) -> list[frozenset[tuple[int, int]]]:
    """No local edges; block inside a bag stays bounded by the bag size."""
    return [frozenset() for _ in ctx.subparts]


def spanning_local(ctx: LocalContext) -> list[frozenset[tuple[int, int]]]:
    """Every subpart gets the whole repaired tree (testing aid)."""
    return [frozenset(ctx.repaired.edge_pairs) for _ in ctx.subparts]


# ---------------------------------------------------------------------------
# Clique-sum constructor
# ---------------------------------------------------------------------------


class _BagLCA:
    """Binary-lifting LCA over the rooted bag tree."""

    def __init__(self, cst: CliqueSumTree):
        n = len(cst.bags)
        par = [-1] * n
        depth = [0] * n
        order = []
        stack = [cst.root]
        seen = {cst.root}
        while stack:
            b = stack.pop()
            order.append(b)
            for c in cst.children[b]:
                if c not in seen:
                    seen.add(c)
                    par[c] = b
                    depth[c] = depth[b] + 1
                    stack.append(c)
        self.depth = depth
        bits = max(1, n.bit_length())
        up = [par]
        for _ in range(bits):
            prev = up[-1]
            up.append([prev[x] if prev[x] < 0 else prev[prev[x]] for x in range(n)])
        self.up = up

    def lca(self, a: int, b: int) -> int:
        da, db = self.depth[a], self.depth[b]
        if da < db:
            a, b, da, db = b, a, db, da
        diff = da - db
        k = 0
        while diff:
            if diff & 1:
                a = self.up[k][a]
            diff >>= 1
            k += 1
        if a == b:
            return a
        for k in range(len(self.up) - 1, -1, -1):
            if self.up[k][a] != self.up[k][b]:
                a = self.up[k][a]
                b = self.up[k][b]
        return self.up[0][a]

    def lca_set(self, xs: Iterable[int]) -> int:
        it = iter(xs)
        h = next(it)
        for x in it:
            h = self.lca(h, x)
        return h


def _bag_local_components(
    g: AnnotatedGraph, cst: CliqueSumTree, bag_idx: int, verts: frozenset[int]
) -> list[frozenset[int]]:
    """Components of ``verts`` inside the bag with partial cliques completed.

    Each clique half of every link incident to the bag counts as fully
    connected; no edges are assumed between the two halves of a double link.
    """
    bag = cst.bags[bag_idx]
    adj: dict[int, set[int]] = {v: set() for v in verts}
    for v in verts:
        for u, _eid in g.adjacency[v]:
            if u in verts:
                adj[v].add(u)
    incident: list[tuple[frozenset[int], ...]] = []
    if bag_idx in cst.parent_link:
        incident.append(cst.parent_link[bag_idx][1])
    for c in cst.children[bag_idx]:
        incident.append(cst.parent_link[c][1])
    for cliques in incident:
        for half in cliques:
            hv = sorted(half & verts)
            for i, a in enumerate(hv):
                for b in hv[i + 1 :]:
                    adj[a].add(b)
                    adj[b].add(a)
    comps: list[frozenset[int]] = []
    left = set(verts)
    while left:
        s = min(left)
        comp = {s}
        q = deque([s])
        while q:
            x = q.popleft()
            for y in adj[x]:
                if y in left and y not in comp:
                    comp.add(y)
                    q.append(y)
        comps.append(frozenset(comp))
        left -= comp
    return comps


def cliquesum_shortcut(
    g: AnnotatedGraph,
    cst: CliqueSumTree,
    t: RootedTree,
    parts: Partition,
    local_constructor: LocalConstructor | None = None,
) -> Shortcut:
    """Shortcut over a clique-sum decomposition tree.

    Per part: bags meeting the part form a connected bag set; below its
    lowest bag, every descendant bag donates its tree edges (minus those
    inside the lowest bag itself) through each child clique the part
    touches.  Inside the lowest bag, the part splits into at most
    DOUBLE_SPLIT_LIMIT components (clique halves completed), and the local
    constructor may add repaired-tree edges, kept only when they are real
    tree edges outside the parent clique.
    """
    bad = validate_parts(g, parts)
    if bad:
        raise ConstructorError("; ".join(bad))
    vbags: dict[int, list[int]] = {}
    for b, bag in enumerate(cst.bags):
        for v in bag:
            vbags.setdefault(v, []).append(b)
    for v in range(g.n):
        if v not in vbags:
            raise ConstructorError(f"vertex {v} in no bag")
    tset = t.edge_pairs
    bag_tedges: list[list[tuple[int, int]]] = []
    for bag in cst.bags:
        bag_tedges.append([e for e in tset if e[0] in bag and e[1] in bag])
    lca = _BagLCA(cst)

    def desc_tedges(top: int) -> set[tuple[int, int]]:
        out: set[tuple[int, int]] = set()
        stack = [top]
        while stack:
            b = stack.pop()
            out.update(bag_tedges[b])
            stack.extend(cst.children[b])
        return out

    edge_sets: list[frozenset[tuple[int, int]]] = []
    for part in parts.parts:
        bags_touched = sorted({b for v in part for b in vbags[v]})
        h = lca.lca_set(bags_touched)
        H: set[tuple[int, int]] = set()
        h_edges = set(bag_tedges[h])
        for c in cst.children[h]:
            cliques = cst.parent_link[c][1]
            joint = frozenset().union(*cliques)
            if part & joint:
                H |= desc_tedges(c) - h_edges
        pv = part & cst.bags[h]
        if pv:
            subparts = _bag_local_components(g, cst, h, frozenset(pv))
            if len(subparts) > DOUBLE_SPLIT_LIMIT:
                raise ConstructorError(
                    f"part splits into {len(subparts)} components in bag {h}"
                    f" (> {DOUBLE_SPLIT_LIMIT})"
                )
            if local_constructor is not None:
                rt = repaired_tree(t, cst.bags[h])
                ctx = LocalContext(
                    graph=g, bag=cst.bags[h], repaired=rt, subparts=tuple(subparts)
                )
                parent_cl: frozenset[int] = frozenset()
                if h in cst.parent_link:
                    parent_cl = frozenset().union(*cst.parent_link[h][1])
                for es in local_constructor(ctx):
                    for u, v in es:
                        e = (u, v) if u < v else (v, u)
                        if e not in tset:
                            continue
                        if e[0] in parent_cl and e[1] in parent_cl:
                            continue
                        H.add(e)
        edge_sets.append(frozenset(H))
    return Shortcut(tree=t, edge_sets=tuple(edge_sets))


def treewidth_shortcut(
    g: AnnotatedGraph,
    td: TreeDecomposition,
    t: RootedTree,
    parts: Partition,
    compress: bool = True,
) -> Shortcut:
    """Shortcut via a tree decomposition read as a clique-sum tree.

    Bags have at most width+1 vertices, so the empty bag-local shortcut
    already bounds the block parameter by O(width); compression keeps the
    global congestion at O(width * log^2) of the bag count.
    """
    cst = td_to_cliquesum(td)
    if compress:
        cst = compress_cliquesum(cst)
    return cliquesum_shortcut(g, cst, t, parts, local_constructor=None)


# ---------------------------------------------------------------------------
# Apex constructor
# ---------------------------------------------------------------------------


def _merge_apices(
    g: AnnotatedGraph, t: RootedTree
) -> tuple[AnnotatedGraph, RootedTree, int, dict[int, int], dict[tuple[int, int], tuple[int, int]]]:
    """Contract all apices into one, re-rooting the contracted tree there.

    Returns (graph, tree, apex id, vertex map, tree-edge preimages): each
    contracted tree edge remembers one original tree edge that maps onto it.
    """
    apices = g.apices
    q = len(apices)
    non_apex = [v for v in range(g.n) if v not in set(apices)]
    mv: dict[int, int] = {old: i for i, old in enumerate(non_apex)}
    x = len(non_apex)
    for a in apices:
        mv[a] = x
    n2 = x + 1
    edges: list[tuple[int, int, object]] = []
    emap: dict[int, int] = {}
    seen_pairs: dict[tuple[int, int], int] = {}
    for eid, (u, v, w) in enumerate(g.edges):
        a, b = mv[u], mv[v]
        if a == b:
            continue
        key = (a, b) if a < b else (b, a)
        if key in seen_pairs:
            continue
        seen_pairs[key] = eid
        emap[eid] = len(edges)
        edges.append((key[0], key[1], w))
    rot = None
    if g.rotation is not None:
        rot = [None] * n2
        for old in non_apex:
            r = g.rotation[old]
            if r is not None:
                rot[mv[old]] = tuple(emap[e] for e in r if e in emap)
    vortices = []
    for vx in g.vortices:
        vortices.append(
            type(vx)(
                boundary=tuple(mv[b] for b in vx.boundary),
                internals=tuple((mv[v], arc) for v, arc in vx.internals),
                depth=vx.depth,
            )
        )
    g2 = AnnotatedGraph(
        n=n2,
        edges=tuple(edges),
        rotation=tuple(rot) if rot is not None else None,
        apices=(x,),
        vortices=tuple(vortices),
    )
    # contracted spanning tree edges, with preimages
    pre: dict[tuple[int, int], tuple[int, int]] = {}
    adj: dict[int, list[int]] = {v: [] for v in range(n2)}
    for u, v in sorted(t.edge_pairs):
        a, b = mv[u], mv[v]
        if a == b:
            continue
        key = (a, b) if a < b else (b, a)
        if key not in pre:
            pre[key] = (u, v)
            adj[key[0]].append(key[1])
            adj[key[1]].append(key[0])
    parent: list[int | None] = [None] * n2
    depth: list[int | None] = [None] * n2
    depth[x] = 0
    dq = deque([x])
    while dq:
        v = dq.popleft()
        for u in sorted(adj[v]):
            if depth[u] is None:
                depth[u] = depth[v] + 1
                parent[u] = v
                dq.append(u)
    if any(d is None for d in depth):
        raise ConstructorError("contracted spanning tree does not span")
    # drop preimages of contracted-tree edges that the BFS subtree skipped
    keep_pre = {}
    for v in range(n2):
        p = parent[v]
        if p is not None:
            key = (v, p) if v < p else (p, v)
            keep_pre[key] = pre[key]
    t2 = RootedTree(
        root=x,
        parent=tuple(parent),
        depth_of=tuple(depth),
        diameter=tree_diameter(parent, range(n2)),
    )
    return g2, t2, x, mv, keep_pre


def _extend_tree_over(
    g: AnnotatedGraph, base_parent: dict[int, int | None], root: int
) -> RootedTree:
    """Spanning tree of g that contains the given parent skeleton."""
    parent: list[int | None] = [None] * g.n
    depth: list[int | None] = [None] * g.n
    depth[root] = 0
    children: dict[int, list[int]] = {}
    for v, p in base_parent.items():
        if p is not None:
            children.setdefault(p, []).append(v)
    dq = deque([root])
    order = []
    while dq:
        v = dq.popleft()
        order.append(v)
        for c in sorted(children.get(v, ())):
            if depth[c] is None:
                depth[c] = depth[v] + 1
                parent[c] = v
                dq.append(c)
    # attach everything else by BFS over the host graph
    dq = deque(order)
    while dq:
        v = dq.popleft()
        for u, _eid in g.adjacency[v]:
            if depth[u] is None:
                depth[u] = depth[v] + 1
                parent[u] = v
                dq.append(u)
    if any(d is None for d in depth):
        raise ConstructorError("tree extension failed to span")
    return RootedTree(
        root=root,
        parent=tuple(parent),
        depth_of=tuple(depth),
        diameter=tree_diameter(parent, range(g.n)),
    )


def apex_shortcut(g: AnnotatedGraph, t: RootedTree, parts: Partition) -> Shortcut:
    """Shortcut for a graph with one or more apices (vortices allowed).

    Parts holding an apex get the whole spanning tree.  The rest follow the
    cell route: subtrees hanging off the (merged) apex become cells, the
    cell-to-part relation hands each related part the cell subtree plus its
    uplink, unrelated leftovers get per-cell treewidth-route locals, and all
    special (vortex) cells are handled jointly over the apex-rooted subtree.
    """
    if not g.apices:
        raise ConstructorError("no apex present")
    if set(g.apices) & set(g.vortex_internal_ids):
        raise ConstructorError("apex declared inside a vortex")
    bad = validate_parts(g, parts)
    if bad:
        raise ConstructorError("; ".join(bad))
    apex_set = set(g.apices)
    full_tree = frozenset(t.edge_pairs)
    apexful = {i for i, p in enumerate(parts.parts) if p & apex_set}

    g1, t1, x, mv, pre = _merge_apices(g, t)
    plain = {i: frozenset(mv[v] for v in p) for i, p in enumerate(parts.parts) if i not in apexful}

    keep_h = [v for v in range(g1.n) if v != x]
    H, hmap = induced_subgraph(g1, keep_h)
    if H.n and len(_reach(H, 0)) != H.n:
        raise ConstructorError("graph minus apex is disconnected")
    inv_h = {new: old for old, new in hmap.items()}

    cp_g1 = cells_from_apex_removal(g1, t1, x)
    cells_h = [frozenset(hmap[v] for v in c) for c in cp_g1.cells]
    cp_h = CellPartition.of(H, cells_h)
    H2, cp2, stars = merge_vortex_cells(H, cp_h)

    parts_h = {i: frozenset(hmap[v] for v in p) for i, p in plain.items()}
    order = sorted(parts_h)
    rel = assign_cells(
        H2,
        cp2,
        Partition(parts=tuple(parts_h[i] for i in order)),
        stars=stars,
    )
    related: dict[int, set[int]] = {}
    for c, local_i in rel.pairs:
        related.setdefault(c, set()).add(order[local_i])

    t1_pairs = t1.edge_pairs
    x_edge: dict[int, tuple[int, int]] = {}
    for e in t1_pairs:
        if e[0] == x:
            x_edge[e[1]] = e
        elif e[1] == x:
            x_edge[e[0]] = e
    uplinks_of: dict[int, tuple[tuple[int, int], ...]] = {}
    cell_g1: dict[int, frozenset[int]] = {}
    star_set = set(stars)
    for ci, cell in enumerate(cp2.cells):
        verts_g1 = frozenset(inv_h[v] for v in cell if v not in star_set)
        cell_g1[ci] = verts_g1
        ups = sorted(x_edge[v] for v in verts_g1 if v in x_edge)
        if not ups:
            raise ConstructorError(f"cell {ci} has no uplink")
        uplinks_of[ci] = tuple(ups)

    def tree_edges_within(verts: frozenset[int]) -> set[tuple[int, int]]:
        out = set()
        for v in verts:
            p = t1.parent[v]
            if p is not None and p in verts:
                out.add((v, p) if v < p else (p, v))
        return out

    H_sets: dict[int, set[tuple[int, int]]] = {i: set() for i in plain}
    for ci, owners in sorted(related.items()):
        cell_edges = tree_edges_within(cell_g1[ci])
        cell_edges.add(uplinks_of[ci][0])
        for i in sorted(owners):
            H_sets[i] |= cell_edges

    # leftover local shortcuts per normal cell
    for ci, cell in enumerate(cp2.cells):
        if cp2.special[ci]:
            continue
        if len(cell) < 2:
            continue  # no tree edges inside a singleton cell; nothing assignable
        todo = [
            i
            for i in sorted(plain)
            if parts_h[i] & cell and i not in related.get(ci, set())
        ]
        if not todo:
            continue
        _add_cell_locals(
            H2, t1_pairs, hmap, inv_h, cell, [(i, parts_h[i]) for i in todo], H_sets
        )

    special_cells = [ci for ci in range(len(cp2.cells)) if cp2.special[ci]]
    if special_cells:
        joint = frozenset().union(*(cp2.cells[ci] for ci in special_cells))
        todo = [i for i in sorted(plain) if parts_h[i] & joint]
        if todo:
            uplinks = [e for ci in special_cells for e in uplinks_of[ci]]
            _add_special_locals(
                H2, t1_pairs, hmap, inv_h, joint, [(i, parts_h[i]) for i in todo],
                H_sets, g1, x, uplinks,
            )

    # translate to original tree edges
    edge_sets: list[frozenset[tuple[int, int]]] = []
    for i in range(len(parts.parts)):
        if i in apexful:
            edge_sets.append(full_tree)
            continue
        out = set()
        for e in H_sets[i]:
            out.add(pre[e])
        edge_sets.append(frozenset((min(a, b), max(a, b)) for a, b in out))
    sc = Shortcut(tree=t, edge_sets=tuple(edge_sets))
    bad = sc.validate()
    if bad:
        raise ConstructorError("; ".join(bad))
    return sc


def _reach(g: AnnotatedGraph, src: int) -> set[int]:
    seen = {src}
    stack = [src]
    while stack:
        v = stack.pop()
        for u, _eid in g.adjacency[v]:
            if u not in seen:
                seen.add(u)
                stack.append(u)
    return seen


def _decompose_any(g: AnnotatedGraph) -> TreeDecomposition:
    fully_embedded = (
        g.rotation is not None
        and len(g.embedded_edges) == len(g.edges)
        and all(g.is_embedded_vertex(v) or not g.adjacency[v] for v in range(g.n))
        and not g.apices
        and not g.vortices
    )
    if fully_embedded:
        return planar_tree_decomposition(g)
    return minfill_decomposition(g)


def _add_cell_locals(
    H2: AnnotatedGraph,
    t1_pairs: frozenset[tuple[int, int]],
    hmap: dict[int, int],
    inv_h: dict[int, int],
    cell: frozenset[int],
    todo: list[tuple[int, frozenset[int]]],
    H_sets: dict[int, set[tuple[int, int]]],
) -> None:
    """Treewidth-route local shortcut for parts meeting an unrelated cell.

    Everything outside the cell contracts away along part edges, a spanning
    tree containing the cell's subtree drives the construction, and only
    edges that map back to real spanning-tree edges inside the cell are kept.
    """
    keep = sorted(cell)
    # rotation upkeep pays off only when the planar route will digest the
    # result; tiny cells inside big hosts go straight to min-fill
    with_rot = 5 * len(keep) >= H2.n
    hc, mp = contract_outside(H2, keep, [p for _i, p in todo], keep_rotation=with_rot)
    inv_c = {mp[v]: v for v in keep}
    # skeleton: the cell's own tree edges (translated to contracted labels)
    skel_pairs = []
    for a, b in t1_pairs:
        ha, hb = hmap.get(a), hmap.get(b)
        if ha in cell and hb in cell:
            skel_pairs.append((mp[ha], mp[hb]))
    root = mp[min(keep)]
    oriented = _orient_forest(skel_pairs, root=root)
    tree_c = _extend_tree_over(hc, oriented, root)
    td = _decompose_any(hc)
    sub_parts = Partition(parts=tuple(frozenset(mp[v] for v in p) for _i, p in todo))
    sc = treewidth_shortcut(hc, td, tree_c, sub_parts)
    for (i, _p), es in zip(todo, sc.edge_sets):
        for a, b in es:
            if a in inv_c and b in inv_c:
                u, v = inv_c[a], inv_c[b]
                gu, gv = inv_h.get(u), inv_h.get(v)
                if gu is None or gv is None:
                    continue
                e = (gu, gv) if gu < gv else (gv, gu)
                if e in t1_pairs:
                    H_sets[i].add(e)


def _add_special_locals(
    H2: AnnotatedGraph,
    t1_pairs: frozenset[tuple[int, int]],
    hmap: dict[int, int],
    inv_h: dict[int, int],
    joint: frozenset[int],
    todo: list[tuple[int, frozenset[int]]],
    H_sets: dict[int, set[tuple[int, int]]],
    g1: AnnotatedGraph,
    x: int,
    uplinks: list[tuple[int, int]],
) -> None:
    """Joint local shortcut over all special cells plus the apex.

    The host contracts down to the union of special cells, the apex comes
    back with its surviving neighbors, and the spanning tree is the union of
    the special subtrees with their uplinks, rooted at the apex.
    """
    keep = sorted(joint)
    with_rot = 5 * len(keep) >= H2.n
    hs, mp = contract_outside(H2, keep, [p for _i, p in todo], keep_rotation=with_rot)
    inv_s = {mp[v]: v for v in keep}
    xs = hs.n
    extra: dict[tuple[int, int], object] = {}
    for u, v, w in g1.edges:
        tgt = None
        if u == x and v != x:
            tgt = v
        elif v == x and u != x:
            tgt = u
        if tgt is None:
            continue
        th = hmap.get(tgt)
        if th is None:
            continue
        key = (mp[th], xs)
        if key not in extra:
            extra[key] = w
    edges = list(hs.edges) + [(a, b, w) for (a, b), w in sorted(extra.items())]
    hs_x = AnnotatedGraph(n=hs.n + 1, edges=tuple(edges), rotation=None, apices=(), vortices=())
    if len(_reach(hs_x, xs)) != hs_x.n:
        raise ConstructorError("special-cell host is disconnected from the apex")
    pairs = []
    for a, b in t1_pairs:
        ha, hb = hmap.get(a), hmap.get(b)
        if ha in joint and hb in joint:
            pairs.append((mp[ha], mp[hb]))
    for e in uplinks:
        r = e[0] if e[1] == x else e[1]
        hr = hmap.get(r)
        if hr is not None and hr in joint:
            pairs.append((xs, mp[hr]))
    oriented = _orient_forest(pairs, root=xs)
    tree_s = _extend_tree_over(hs_x, oriented, xs)
    td = _decompose_any(hs_x)
    sub_parts = Partition(parts=tuple(frozenset(mp[v] for v in p) for _i, p in todo))
    sc = treewidth_shortcut(hs_x, td, tree_s, sub_parts)
    up_set = {(min(e), max(e)) for e in uplinks}
    for (i, _p), es in zip(todo, sc.edge_sets):
        for a, b in es:
            if a == xs or b == xs:
                other = b if a == xs else a
                if other in inv_s:
                    gv = inv_h.get(inv_s[other])
                    if gv is None:
                        continue
                    e = (min(x, gv), max(x, gv))
                    if e in up_set:
                        H_sets[i].add(e)
                continue
            if a in inv_s and b in inv_s:
                u, v = inv_s[a], inv_s[b]
                gu, gv = inv_h.get(u), inv_h.get(v)
                if gu is None or gv is None:
                    continue
                e = (gu, gv) if gu < gv else (gv, gu)
                if e in t1_pairs:
                    H_sets[i].add(e)


def _orient_forest(
    pairs: list[tuple[int, int]], root: int
) -> dict[int, int | None]:
    """Orient an edge list into parent links, rooting the root's component
    there and any disjoint components at their lowest vertex."""
    adj: dict[int, list[int]] = {}
    for a, b in pairs:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    parent: dict[int, int | None] = {}
    seen: set[int] = set()
    for s in [root] + sorted(adj):
        if s in seen:
            continue
        parent[s] = None
        seen.add(s)
        dq = deque([s])
        while dq:
            v = dq.popleft()
            for u in sorted(adj.get(v, ())):
                if u not in seen:
                    seen.add(u)
                    parent[u] = v
                    dq.append(u)
    return parent


# ---------------------------------------------------------------------------
# Dispatcher
# ---------------------------------------------------------------------------


def auto_shortcut(
    g: AnnotatedGraph,
    t: RootedTree,
    parts: Partition,
    cfg: ConstructorConfig | None = None,
    cliquesum: CliqueSumTree | None = None,
) -> Shortcut:
    """Pick a constructor from the graph's annotations.

    Apices take the apex route; provided clique-sum data takes the
    clique-sum route (compressed unless configured off); everything else
    goes through a tree decomposition.
    """
    cfg = cfg or ConstructorConfig()
    method = cfg.method
    if method == "auto":
        if g.apices:
            method = "apex"
        elif cliquesum is not None:
            method = "cliquesum"
        else:
            method = "treewidth"
    if method == "apex":
        return apex_shortcut(g, t, parts)
    if method == "cliquesum":
        if cliquesum is None:
            raise ConstructorError("clique-sum method requires a decomposition tree")
        cst = compress_cliquesum(cliquesum) if cfg.compression else cliquesum
        return cliquesum_shortcut(g, cst, t, parts)
    if method == "treewidth":
        if g.apices:
            raise ConstructorError("treewidth route cannot digest apices")
        if g.vortices:
            td = vortex_tree_decomposition(g)
        else:
            td = _decompose_any(g)
        return treewidth_shortcut(g, td, t, parts, compress=cfg.compression)
    raise ConstructorError(f"unknown method {method!r}")
