"""Graph core: BFS trees, heavy-light chains, contraction, face traversal."""
from __future__ import annotations

import math
import random
from collections import deque

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lowcongest.families import grid_graph
from lowcongest.graph import (
    AnnotatedGraph,
    EmbeddingError,
    GraphError,
    RootedTree,
    bfs_tree,
    contract_outside,
    heavy_light,
    insert_vertex_in_face,
    path_contraction,
    repaired_tree,
    tree_diameter,
)


def path_graph(n):
    return AnnotatedGraph.build(n, [(i, i + 1, 1) for i in range(n - 1)])


def star_graph(leaves):
    return AnnotatedGraph.build(leaves + 1, [(0, i, 1) for i in range(1, leaves + 1)])


def oracle_tree_diameter(t: RootedTree) -> int:
    """Independent all-pairs BFS diameter over the tree's own edges."""
    adj: dict[int, list[int]] = {v: [] for v in t.covered}
    for u, v in t.edge_pairs:
        adj[u].append(v)
        adj[v].append(u)
    best = 0
    for s in t.covered:
        dist = {s: 0}
        q = deque([s])
        while q:
            x = q.popleft()
            for y in adj[x]:
                if y not in dist:
                    dist[y] = dist[x] + 1
                    q.append(y)
        best = max(best, max(dist.values(), default=0))
    return best


# -- bfs_tree ---------------------------------------------------------------


def test_bfs_single_vertex():
    g = AnnotatedGraph.build(1, [])
    t = bfs_tree(g, 0)
    assert t.edge_pairs == frozenset()
    assert t.diameter == 0


def test_bfs_path_forced():
    g = path_graph(3)
    t = bfs_tree(g, 0)
    assert t.parent[1] == 0 and t.parent[2] == 1
    assert t.diameter == 2


def test_bfs_grid_corner_depth_and_diameter():
    g = grid_graph(4)
    t = bfs_tree(g, 0)
    depth = max(d for d in t.depth_of if d is not None)
    assert depth == 6
    assert t.diameter <= 2 * depth
    assert t.diameter == oracle_tree_diameter(t)


def test_bfs_disconnected_names_vertex():
    g = AnnotatedGraph(n=3, edges=((0, 1, 1),))
    with pytest.raises(GraphError, match="2"):
        bfs_tree(g, 0)


def test_bfs_tree_edges_exist_in_host():
    rng = random.Random(7)
    for _ in range(10):
        n = rng.randint(2, 40)
        edges = {(i, rng.randrange(i)) for i in range(1, n)}
        for _ in range(n):
            a, b = rng.randrange(n), rng.randrange(n)
            if a != b:
                edges.add((max(a, b), min(a, b)))
        g = AnnotatedGraph.build(n, [(u, v, 1) for u, v in edges])
        t = bfs_tree(g, rng.randrange(n))
        assert not t.validate_against(g)


# -- heavy_light --------------------------------------------------------------


def chain_crossings(t: RootedTree, chains: list[list[int]]) -> int:
    chain_of = {}
    for ci, ch in enumerate(chains):
        for v in ch:
            chain_of[v] = ci
    worst = 0
    leaves = [v for v in t.covered if not t.children.get(v)]
    for leaf in leaves:
        path = t.path_to_root(leaf)
        crossings = len({chain_of[v] for v in path})
        worst = max(worst, crossings)
    return worst


def test_heavy_light_path_single_chain():
    t = bfs_tree(path_graph(5), 0)
    chains = heavy_light(t)
    assert chains == [[0, 1, 2, 3, 4]]


def test_heavy_light_star():
    t = bfs_tree(star_graph(4), 0)
    chains = heavy_light(t)
    sizes = sorted(len(c) for c in chains)
    assert sizes == [1, 1, 1, 2]
    assert [0, 1] in chains  # ties break toward the lowest vertex id


def test_heavy_light_complete_binary_tree():
    # 15 vertices, vertex i has children 2i+1, 2i+2
    edges = [(i, 2 * i + 1, 1) for i in range(7)] + [(i, 2 * i + 2, 1) for i in range(7)]
    g = AnnotatedGraph.build(15, edges)
    t = bfs_tree(g, 0)
    chains = heavy_light(t)
    assert sorted(sum(chains, [])) == list(range(15))
    assert chain_crossings(t, chains) <= 4


def random_tree(n: int, seed: int) -> RootedTree:
    rng = random.Random(seed)
    parent: list[int | None] = [None] * n
    depth: list[int | None] = [None] * n
    depth[0] = 0
    for v in range(1, n):
        p = rng.randrange(v)
        parent[v] = p
        depth[v] = depth[p] + 1
    return RootedTree(
        root=0,
        parent=tuple(parent),
        depth_of=tuple(depth),
        diameter=tree_diameter(parent, range(n)),
    )


@pytest.mark.parametrize("n,seed", [(16, 0), (100, 1), (977, 2), (2048, 3), (4096, 4)])
def test_heavy_light_log_bound_random_trees(n, seed):
    t = random_tree(n, seed)
    chains = heavy_light(t)
    assert sorted(sum(chains, [])) == list(range(n))
    assert chain_crossings(t, chains) <= math.floor(math.log2(n)) + 1


@given(st.integers(2, 200), st.integers(0, 10_000))
@settings(max_examples=60, deadline=None)
def test_heavy_light_partition_property(n, seed):
    t = random_tree(n, seed)
    chains = heavy_light(t)
    assert sorted(sum(chains, [])) == list(range(n))
    assert chain_crossings(t, chains) <= math.floor(math.log2(n)) + 1


# -- path_contraction ----------------------------------------------------------


def test_path_contraction_identity():
    t = bfs_tree(path_graph(4), 0)
    assert path_contraction(t, frozenset({2}), 2, 2) == [2]


def test_path_contraction_all_kept():
    t = bfs_tree(path_graph(4), 0)
    assert path_contraction(t, frozenset(range(4)), 0, 3) == [0, 1, 2, 3]


def test_path_contraction_drops_middle():
    t = bfs_tree(path_graph(4), 0)
    assert path_contraction(t, frozenset({0, 3}), 0, 3) == [0, 3]


def test_path_contraction_requires_kept_endpoints():
    t = bfs_tree(path_graph(4), 0)
    with pytest.raises(GraphError):
        path_contraction(t, frozenset({0, 3}), 0, 2)


@given(st.integers(2, 120), st.integers(0, 5000), st.data())
@settings(max_examples=60, deadline=None)
def test_path_contraction_subsequence_property(n, seed, data):
    t = random_tree(n, seed)
    s = data.draw(st.integers(0, n - 1))
    t2 = data.draw(st.integers(0, n - 1))
    extra = data.draw(st.sets(st.integers(0, n - 1), max_size=n))
    keep = frozenset(extra | {s, t2})
    full = t.tree_path(s, t2)
    contracted = path_contraction(t, keep, s, t2)
    it = iter(full)
    assert all(v in it for v in contracted)  # subsequence check
    assert set(contracted) <= keep


def test_repaired_tree_is_minor_and_spans():
    t = random_tree(40, 9)
    keep = frozenset(range(0, 40, 3))
    rt = repaired_tree(t, keep)
    assert rt.covered == keep
    assert len(rt.edge_pairs) == len(keep) - 1
    assert rt.diameter <= t.diameter
    # every repaired edge contracts a keep-free tree path
    for u, v in rt.edge_pairs:
        inner = t.tree_path(u, v)[1:-1]
        assert not (set(inner) & keep)


# -- contract_outside ------------------------------------------------------------


def components_of(g: AnnotatedGraph, verts: set[int]) -> int:
    left = set(verts)
    comps = 0
    while left:
        comps += 1
        s = left.pop()
        stack = [s]
        while stack:
            v = stack.pop()
            for u, _e in g.adjacency[v]:
                if u in left:
                    left.discard(u)
                    stack.append(u)
    return comps


def test_contract_identity():
    g = path_graph(4)
    g2, mp = contract_outside(g, range(4))
    assert g2.n == 4 and len(g2.edges) == 3
    assert mp == {v: v for v in range(4)}


def test_contract_triangle_to_point():
    g = AnnotatedGraph.build(3, [(0, 1, 1), (1, 2, 1), (0, 2, 1)])
    g2, mp = contract_outside(g, {0}, [frozenset({1, 2})])
    assert g2.n == 1 and len(g2.edges) == 0
    assert mp == {0: 0, 1: 0, 2: 0}


def test_contract_grid_snakes_stay_connected():
    g = grid_graph(5)
    # keep: a BFS-subtree-like block (rows 0-1); two snake parts below
    keep = {r * 5 + c for r in range(2) for c in range(5)}
    snake1 = {2 * 5 + c for c in range(5)} | {3 * 5 + 0}
    snake2 = {3 * 5 + c for c in range(1, 5)} | {4 * 5 + c for c in range(5)}
    g2, mp = contract_outside(g, keep, [frozenset(snake1), frozenset(snake2)])
    assert g2.n == len(keep)
    img1 = {mp[v] for v in snake1}
    img2 = {mp[v] for v in snake2}
    assert components_of(g2, img1) == 1
    assert components_of(g2, img2) == 1
    assert not g2.validate()


def test_contract_preserves_keep_part_incidences():
    g = grid_graph(5)
    keep = {r * 5 + c for r in range(2) for c in range(5)}
    part = frozenset({5, 6, 11, 16, 21})  # column crossing keep and outside
    g2, mp = contract_outside(g, keep, [part])
    surviving = {mp[v] for v in part if v in keep}
    assert surviving == {mp[5], mp[6]}


def test_contract_keeps_embedding():
    g = grid_graph(4)
    keep = frozenset(range(8))
    g2, _mp = contract_outside(g, keep, [])
    assert len(g2.embedded_edges) == len(g2.edges)
    assert not g2.validate()
    emb = g2.embedding()
    V, E, F = g2.n, len(g2.edges), len(emb.faces)
    assert V - E + F == 2


def test_contract_rejects_empty_keep():
    with pytest.raises(GraphError):
        contract_outside(path_graph(3), [])


@given(st.integers(0, 10_000), st.data())
@settings(max_examples=40, deadline=None)
def test_contract_preserves_incidences_property(seed, data):
    rng = random.Random(seed)
    k = rng.randint(3, 6)
    g = grid_graph(k)
    keep = frozenset(data.draw(st.sets(st.integers(0, k * k - 1), min_size=1)))
    # two disjoint connected parts grown by BFS claiming
    seeds = rng.sample(range(k * k), 2)
    owner = {seeds[0]: 0, seeds[1]: 1} if seeds[0] != seeds[1] else {seeds[0]: 0}
    frontier = sorted(owner)
    while frontier:
        v = frontier.pop(0)
        for u, _e in g.adjacency[v]:
            if u not in owner and rng.random() < 0.7:
                owner[u] = owner[v]
                frontier.append(u)
    parts = [frozenset(v for v, i in owner.items() if i == 0),
             frozenset(v for v, i in owner.items() if i == 1)]
    parts = [p for p in parts if p]
    # "cells": keep split into quadrant pieces
    cells = {}
    for v in keep:
        cells.setdefault((v // k // 2, v % k // 2), set()).add(v)
    before = {
        (ci, pi): bool(cell & p)
        for ci, cell in enumerate(cells.values())
        for pi, p in enumerate(parts)
    }
    g2, mp = contract_outside(g, keep, parts)
    after = {
        (ci, pi): bool({mp[v] for v in cell} & {mp[v] for v in p if v in keep})
        for ci, cell in enumerate(cells.values())
        for pi, p in enumerate(parts)
    }
    assert before == after
    for p in parts:
        img = {mp[v] for v in p if v in keep}
        if img:
            assert components_of(g2, img) == 1


# -- faces --------------------------------------------------------------------


def test_faces_triangle():
    g = AnnotatedGraph.build(
        3, [(0, 1, 1), (1, 2, 1), (0, 2, 1)], rotation=[(0, 2), (0, 1), (1, 2)]
    )
    emb = g.embedding()
    assert len(emb.faces) == 2
    assert sorted(len(f) for f in emb.faces) == [3, 3]
    assert not g.validate()


def test_faces_single_edge():
    g = AnnotatedGraph.build(2, [(0, 1, 1)], rotation=[(0,), (0,)])
    emb = g.embedding()
    assert len(emb.faces) == 1
    assert len(emb.faces[0]) == 2


def test_faces_grid3():
    g = grid_graph(3)
    emb = g.embedding()
    assert len(emb.faces) == 5
    V, E, F = g.n, len(g.edges), len(emb.faces)
    assert V - E + F == 2
    assert sum(len(f) for f in emb.faces) == 2 * E


def test_faces_inconsistent_rotation_rejected():
    # edge 0 embedded at vertex 0 but missing from vertex 1's rotation
    g = AnnotatedGraph.build(2, [(0, 1, 1)], rotation=[(0,), ()])
    assert any("embedded at" in v for v in g.validate())


def test_torus_rotation_fails_euler():
    # K4 with a rotation that is not a sphere embedding
    g = AnnotatedGraph.build(
        4,
        [(0, 1, 1), (0, 2, 1), (0, 3, 1), (1, 2, 1), (1, 3, 1), (2, 3, 1)],
        rotation=[(0, 1, 2), (0, 3, 4), (1, 3, 5), (2, 4, 5)],
    )
    violations = g.validate()
    emb_ok = not any("V-E+F" in v for v in violations)
    if emb_ok:
        emb = g.embedding()
        assert 4 - 6 + len(emb.faces) == 2


def test_insert_vertex_in_face_keeps_sphere():
    g = grid_graph(3)
    emb = g.embedding()
    inner = min(i for i, f in enumerate(emb.faces) if len(f) == 4)
    g2, x = insert_vertex_in_face(g, emb.faces[inner])
    assert x == 9
    assert not g2.validate()
    emb2 = g2.embedding()
    assert g2.n - len(g2.edges) + len(emb2.faces) == 2
