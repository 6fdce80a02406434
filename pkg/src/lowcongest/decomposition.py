"""Tree decompositions and clique-sum decomposition trees.

Two decomposition flavors live here: plain tree decompositions (bags are
vertex sets) used on planar and planar-with-vortex graphs, and rooted
clique-sum trees whose tree edges carry partial cliques.  Depth compression
folds heavy-light chains of the clique-sum tree into balanced binary
fragments, which introduces "double" tree edges carrying two partial
cliques.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .graph import (
    AnnotatedGraph,
    VortexSpec,
    bfs_distances,
    heavy_chains,
    replace_vortices_with_stars,
)


class DecompositionError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Tree decompositions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TreeDecomposition:
    bags: tuple[frozenset[int], ...]
    tree: tuple[tuple[int, int], ...]  # edges between bag indices

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags), default=0) - 1

    @staticmethod
    def of(bags: Sequence[Iterable[int]], tree: Iterable[tuple[int, int]]) -> "TreeDecomposition":
        return TreeDecomposition(
            bags=tuple(frozenset(b) for b in bags),
            tree=tuple((min(a, b), max(a, b)) for a, b in tree),
        )

    @cached_property
    def bag_adj(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in self.bags]
        for a, b in self.tree:
            adj[a].append(b)
            adj[b].append(a)
        return tuple(tuple(sorted(x)) for x in adj)


def _bag_tree_is_tree(nbags: int, edges: Sequence[tuple[int, int]]) -> bool:
    if nbags == 0:
        return False
    if len(edges) != nbags - 1:
        return False
    seen = {0}
    adj: dict[int, list[int]] = {i: [] for i in range(nbags)}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    q = deque([0])
    while q:
        x = q.popleft()
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                q.append(y)
    return len(seen) == nbags


def _bagsets_connected(td_adj: Sequence[Sequence[int]], holding: list[int]) -> bool:
    if not holding:
        return False
    hold = set(holding)
    seen = {holding[0]}
    q = deque([holding[0]])
    while q:
        x = q.popleft()
        for y in td_adj[x]:
            if y in hold and y not in seen:
                seen.add(y)
                q.append(y)
    return len(seen) == len(hold)


def validate_decomposition(g: AnnotatedGraph, td) -> list[str]:
    """Check decomposition properties; works for both decomposition flavors.

    For a plain TreeDecomposition: bag union covers V, per-vertex bag sets
    are connected in the bag tree, and every edge lies inside some bag.  A
    CliqueSumTree is additionally checked for partial-clique intersections,
    clique sizes against k (doubled on double edges), and the two-double-
    children bound per bag.
    """
    if isinstance(td, CliqueSumTree):
        return _validate_cliquesum(g, td)
    bad: list[str] = []
    if not _bag_tree_is_tree(len(td.bags), td.tree):
        bad.append("bag graph is not a tree")
        return bad
    holding = _bags_by_vertex(td.bags)
    missing = set(range(g.n)) - set(holding)
    if missing:
        bad.append(f"vertex {min(missing)} in no bag")
    for v in sorted(holding):
        if not _bagsets_connected(td.bag_adj, holding[v]):
            bad.append(f"bag set of vertex {v} disconnected in the tree")
    for eid, (u, v, _w) in enumerate(g.edges):
        if not set(holding.get(u, ())) & set(holding.get(v, ())):
            bad.append(f"edge {u}-{v} inside no bag")
    return bad


def _bags_by_vertex(bags: Sequence[frozenset[int]]) -> dict[int, list[int]]:
    holding: dict[int, list[int]] = {}
    for i, b in enumerate(bags):
        for v in b:
            holding.setdefault(v, []).append(i)
    return holding


def _components(adj: dict[int, set[int]], verts: set[int]) -> list[set[int]]:
    out = []
    left = set(verts)
    while left:
        s = min(left)
        comp = {s}
        q = deque([s])
        while q:
            x = q.popleft()
            for y in adj.get(x, ()):
                if y in left and y not in comp:
                    comp.add(y)
                    q.append(y)
        out.append(comp)
        left -= comp
    return out


def planar_tree_decomposition(g: AnnotatedGraph) -> TreeDecomposition:
    """Valid tree decomposition of a fully embedded graph, width near O(D).

    Recursively splits on whole breadth-first layers (middle layer by vertex
    count), which keeps bags inside a couple of consecutive layers; a
    min-fill elimination decomposition is computed as well on small inputs
    and whichever is narrower wins.  Validity is guaranteed either way; the
    width bound is enforced empirically by the calibration suite.
    """
    if g.apices or g.vortices:
        raise DecompositionError("apices/vortices present; decompose the plain planar host")
    if g.rotation is None:
        raise DecompositionError("rotation system required")
    if len(g.embedded_edges) != len(g.edges):
        raise DecompositionError("graph is not fully embedded")
    td = bfs_split_decomposition(g)
    if g.n <= 400:
        alt = minfill_decomposition(g)
        if alt.width < td.width:
            td = alt
    return td


def bfs_split_decomposition(g: AnnotatedGraph, root: int = 0) -> TreeDecomposition:
    """Recursive separator decomposition using global BFS layers."""
    if g.n == 1:
        return TreeDecomposition.of([[0]], [])
    layer = bfs_distances(g, root)
    if len(layer) != g.n:
        raise DecompositionError("graph disconnected")
    adj = {v: {u for u, _ in g.adjacency[v]} for v in range(g.n)}
    bags: list[frozenset[int]] = []
    edges: list[tuple[int, int]] = []

    def rec(verts: set[int], ctx: frozenset[int], parent_bag: int | None) -> None:
        layers = sorted({layer[v] for v in verts})
        if len(layers) <= 1 or len(verts) + len(ctx) <= 3:
            bag = frozenset(verts) | ctx
            idx = len(bags)
            bags.append(bag)
            if parent_bag is not None:
                edges.append((parent_bag, idx))
            return
        counts = {l: 0 for l in layers}
        for v in verts:
            counts[layer[v]] += 1
        half = len(verts) / 2
        acc = 0
        mid = layers[0]
        for l in layers:
            acc += counts[l]
            mid = l
            if acc >= half:
                break
        if mid == layers[-1] and len(layers) > 1:
            mid = layers[-2]
        sep = {v for v in verts if layer[v] == mid}
        bag = frozenset(sep) | ctx
        idx = len(bags)
        bags.append(bag)
        if parent_bag is not None:
            edges.append((parent_bag, idx))
        rest = verts - sep
        for comp in _components(adj, rest):
            sub_ctx = frozenset()
            for v in comp:
                sub_ctx |= adj[v] & bag
            rec(comp, sub_ctx, idx)

    rec(set(range(g.n)), frozenset(), None)
    return TreeDecomposition.of(bags, edges)


def minfill_decomposition(g: AnnotatedGraph) -> TreeDecomposition:
    """Elimination-order decomposition with the min-fill heuristic.

    Valid on any connected graph; the bag of an eliminated vertex attaches
    to the bag of the first later-eliminated vertex it still touches.
    """
    adj: dict[int, set[int]] = {v: {u for u, _ in g.adjacency[v]} for v in range(g.n)}
    order: list[int] = []
    bag_of: dict[int, frozenset[int]] = {}
    work = {v: set(ns) for v, ns in adj.items()}

    def fill_needed(v: int) -> int:
        ns = sorted(work[v])
        cnt = 0
        for i, a in enumerate(ns):
            for b in ns[i + 1 :]:
                if b not in work[a]:
                    cnt += 1
        return cnt

    remaining = set(range(g.n))
    while remaining:
        v = min(remaining, key=lambda x: (fill_needed(x), x))
        ns = sorted(work[v])
        bag_of[v] = frozenset([v] + ns)
        order.append(v)
        for i, a in enumerate(ns):
            for b in ns[i + 1 :]:
                work[a].add(b)
                work[b].add(a)
        for a in ns:
            work[a].discard(v)
        del work[v]
        remaining.discard(v)

    pos = {v: i for i, v in enumerate(order)}
    bags = [bag_of[v] for v in order]
    edges = []
    for i, v in enumerate(order):
        later = [u for u in bag_of[v] if u != v]
        if later:
            nxt = min(later, key=lambda u: pos[u])
            edges.append((i, pos[nxt]))
    if g.n == 1:
        return TreeDecomposition.of([[0]], [])
    return TreeDecomposition.of(bags, edges)


def augment_vortex(td: TreeDecomposition, vortex: VortexSpec, star: int | None = None) -> TreeDecomposition:
    """Insert a vortex's internal vertices into a decomposition of its host.

    The decomposition must cover the boundary cycle (typically it was built
    on the host with the vortex replaced by a star vertex).  The star, when
    given, is stripped from every bag first; each internal vertex then joins
    every bag meeting its arc, so each boundary vertex adds at most `depth`
    vertices to its bags.
    """
    bags = [set(b) for b in td.bags]
    if star is not None:
        for b in bags:
            b.discard(star)
    boundary_all = set(vortex.boundary)
    covered = set().union(*bags) if bags else set()
    if not boundary_all <= covered:
        raise DecompositionError("decomposition does not cover the vortex boundary")
    for v, (lo, hi) in vortex.internals:
        arc = {vortex.boundary[p] for p in vortex.arc_positions(lo, hi)}
        for b in bags:
            if b & arc:
                b.add(v)
    return TreeDecomposition.of(bags, td.tree)


def vortex_tree_decomposition(g: AnnotatedGraph) -> TreeDecomposition:
    """Decomposition of a planar graph with vortices, on original vertex ids.

    Internally each vortex is replaced by an embedded star vertex, the star
    host is decomposed, stars are stripped, and the internal vertices are
    injected back bag by bag.  Callers never see the stars.
    """
    if g.apices:
        raise DecompositionError("apices present; remove them first")
    if not g.vortices:
        return planar_tree_decomposition(g)
    host, vmap, stars = replace_vortices_with_stars(g)
    td = planar_tree_decomposition(host)
    star_set = set(stars)
    inv = {new: old for old, new in vmap.items()}
    bags = []
    for b in td.bags:
        bags.append(frozenset(inv[v] for v in b if v not in star_set))
    td = TreeDecomposition.of(bags, td.tree)
    for vx in g.vortices:
        td = augment_vortex(td, vx)
    return td


# ---------------------------------------------------------------------------
# Clique-sum decomposition trees
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CliqueSumTree:
    """Rooted tree of bags glued along partial cliques.

    Bags are vertex sets; a bag's edge set is implicit (all graph edges with
    both endpoints inside).  A tree link carries one partial clique, or two
    after chain folding ("double" links), in which case the two halves stay
    separate: no edges may be assumed between them.
    """

    bags: tuple[frozenset[int], ...]
    links: tuple[tuple[int, int, tuple[frozenset[int], ...]], ...]  # (parent, child, cliques)
    root: int
    k: int

    @staticmethod
    def of(bags, links, root, k) -> "CliqueSumTree":
        return CliqueSumTree(
            bags=tuple(frozenset(b) for b in bags),
            links=tuple((a, b, tuple(frozenset(c) for c in cl)) for a, b, cl in links),
            root=root,
            k=k,
        )

    @cached_property
    def children(self) -> dict[int, tuple[int, ...]]:
        ch: dict[int, list[int]] = {i: [] for i in range(len(self.bags))}
        for a, b, _cl in self.links:
            ch[a].append(b)
        return {i: tuple(sorted(c)) for i, c in ch.items()}

    @cached_property
    def parent_link(self) -> dict[int, tuple[int, tuple[frozenset[int], ...]]]:
        out = {}
        for a, b, cl in self.links:
            out[b] = (a, cl)
        return out

    def depth(self) -> int:
        """Maximum number of bags on a root-to-leaf path (root alone = 1)."""
        best = 0
        stack = [(self.root, 1)]
        while stack:
            v, d = stack.pop()
            best = max(best, d)
            for c in self.children[v]:
                stack.append((c, d + 1))
        return best

    def is_double(self, child: int) -> bool:
        return len(self.parent_link[child][1]) > 1

    @cached_property
    def bag_adj(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in self.bags]
        for a, b, _cl in self.links:
            adj[a].append(b)
            adj[b].append(a)
        return tuple(tuple(sorted(x)) for x in adj)


def _validate_cliquesum(g: AnnotatedGraph, cst: CliqueSumTree) -> list[str]:
    bad: list[str] = []
    nb = len(cst.bags)
    if not (0 <= cst.root < nb):
        return ["root out of range"]
    if not _bag_tree_is_tree(nb, [(a, b) for a, b, _ in cst.links]):
        return ["bag graph is not a tree"]
    holding = _bags_by_vertex(cst.bags)
    missing = set(range(g.n)) - set(holding)
    if missing:
        bad.append(f"vertex {min(missing)} in no bag")
    for v in sorted(holding):
        if not _bagsets_connected(cst.bag_adj, holding[v]):
            bad.append(f"bag set of vertex {v} disconnected in the tree")
    for u, v, _w in g.edges:
        if not set(holding.get(u, ())) & set(holding.get(v, ())):
            bad.append(f"edge {u}-{v} inside no bag")
    dbl_children: dict[int, int] = {}
    for a, b, cliques in cst.links:
        inter = cst.bags[a] & cst.bags[b]
        joint = frozenset().union(*cliques) if cliques else frozenset()
        if inter != joint:
            bad.append(f"link {a}-{b}: bag intersection differs from its cliques")
        if len(cliques) == 1:
            if len(cliques[0]) > cst.k:
                bad.append(f"link {a}-{b}: clique larger than k={cst.k}")
        elif len(cliques) == 2:
            dbl_children[a] = dbl_children.get(a, 0) + 1
            for half in cliques:
                if len(half) > cst.k:
                    bad.append(f"double link {a}-{b}: a half exceeds k={cst.k}")
        else:
            bad.append(f"link {a}-{b}: carries {len(cliques)} cliques")
    for bag, cnt in dbl_children.items():
        if cnt > 2:
            bad.append(f"bag {bag} has {cnt} double-edge children")
    return bad


def td_to_cliquesum(td: TreeDecomposition) -> CliqueSumTree:
    """Read a width-k decomposition as a clique-sum tree: the partial clique
    of each link is the bag intersection, and bags of size <= k+1 are their
    own partial cliques."""
    k = max((len(b) for b in td.bags), default=1)
    links = []
    if td.bags:
        # root at bag 0, orient edges away from it
        adj = td.bag_adj
        seen = {0}
        q = deque([0])
        while q:
            a = q.popleft()
            for b in adj[a]:
                if b not in seen:
                    seen.add(b)
                    links.append((a, b, (td.bags[a] & td.bags[b],)))
                    q.append(b)
    return CliqueSumTree.of(td.bags, links, 0, k)


# ---------------------------------------------------------------------------
# Chain folding and depth compression
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Folded:
    bags: list[frozenset[int]]
    links: list[tuple[int, int, tuple[frozenset[int], ...]]]
    root: int
    pos_to_bag: dict[int, int]  # chain position -> folded bag index


def _fold(bags: Sequence[frozenset[int]], cliques: Sequence[tuple[frozenset[int], ...]]) -> _Folded:
    """Fold a root-to-end chain into a balanced binary fragment.

    Positions first, middle and last merge into one bag; the two remaining
    sub-chains fold recursively and hang below it on double links carrying
    the two partial cliques cut on each side.
    """
    out_bags: list[frozenset[int]] = []
    out_links: list[tuple[int, int, tuple[frozenset[int], ...]]] = []
    pos_to_bag: dict[int, int] = {}

    def rec(lo: int, hi: int) -> int:
        m = hi - lo + 1
        if m <= 3:
            idx = len(out_bags)
            merged = frozenset().union(*bags[lo : hi + 1])
            out_bags.append(merged)
            for p in range(lo, hi + 1):
                pos_to_bag[p] = idx
            return idx
        mid = lo + (m + 1) // 2 - 1  # ceil(m/2)-th bag of the chain
        merged = bags[lo] | bags[mid] | bags[hi]
        idx = len(out_bags)
        out_bags.append(merged)
        pos_to_bag[lo] = pos_to_bag[mid] = pos_to_bag[hi] = idx
        if mid - 1 >= lo + 1:
            left = rec(lo + 1, mid - 1)
            halves = _merge_cliques(cliques[lo], cliques[mid - 1])
            out_links.append((idx, left, halves))
        if hi - 1 >= mid + 1:
            right = rec(mid + 1, hi - 1)
            halves = _merge_cliques(cliques[mid], cliques[hi - 1])
            out_links.append((idx, right, halves))
        return idx

    root = rec(0, len(bags) - 1)
    return _Folded(bags=out_bags, links=out_links, root=root, pos_to_bag=pos_to_bag)


def _merge_cliques(a: tuple[frozenset[int], ...], b: tuple[frozenset[int], ...]) -> tuple[frozenset[int], ...]:
    both = tuple(a) + tuple(b)
    # adjacent original links are single cliques; folded inputs may stack
    return both


def fold_chain(
    bags: Sequence[Iterable[int]],
    cliques: Sequence[Iterable[int]] | None = None,
    k: int | None = None,
) -> CliqueSumTree:
    """Fold one chain of bags (with the cliques cut between consecutive bags)
    into a clique-sum tree of depth at most ceil(log2 m) + 1."""
    bs = [frozenset(b) for b in bags]
    if not bs:
        raise DecompositionError("empty chain")
    if cliques is None:
        cls = [(bs[i] & bs[i + 1],) for i in range(len(bs) - 1)]
    else:
        cls = [(frozenset(c),) for c in cliques]
    if len(cls) != len(bs) - 1:
        raise DecompositionError("need one clique per consecutive bag pair")
    if k is None:
        k = max((len(c[0]) for c in cls), default=max((len(b) for b in bs), default=1))
    folded = _fold(bs, cls)
    return CliqueSumTree.of(folded.bags, folded.links, folded.root, k)


def compress_cliquesum(cst: CliqueSumTree) -> CliqueSumTree:
    """Depth compression: fold every heavy-light chain of the bag tree.

    Each folded chain re-attaches, through the original partial clique, to
    the merged bag now containing the chain head's parent; those links are
    never double.  Any root-to-leaf path crosses O(log n) chains, each
    folded to O(log n) depth, so the output depth is O(log^2 n); every bag
    keeps at most two double-edge children.
    """
    chains = heavy_chains(cst.children, cst.root)
    new_bags: list[frozenset[int]] = []
    new_links: list[tuple[int, int, tuple[frozenset[int], ...]]] = []
    bag_map: dict[int, int] = {}  # old bag index -> new bag index
    chain_root: dict[int, int] = {}  # chain head (old idx) -> new fragment root
    for chain in chains:
        cbags = [cst.bags[i] for i in chain]
        ccl = []
        for a, b in zip(chain, chain[1:]):
            parent, cl = cst.parent_link[b]
            assert parent == a
            ccl.append(cl)
        folded = _fold(cbags, ccl)
        off = len(new_bags)
        new_bags.extend(folded.bags)
        for a, b, cl in folded.links:
            new_links.append((a + off, b + off, cl))
        for pos, old in enumerate(chain):
            bag_map[old] = folded.pos_to_bag[pos] + off
        chain_root[chain[0]] = folded.root + off
    for chain in chains:
        head = chain[0]
        if head == cst.root:
            continue
        parent_old, cl = cst.parent_link[head]
        new_links.append((bag_map[parent_old], chain_root[head], cl))
    new_root = chain_root[cst.root]
    return CliqueSumTree.of(new_bags, new_links, new_root, cst.k)
