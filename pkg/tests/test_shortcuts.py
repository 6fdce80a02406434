"""Parts, metrics, quality, and the exhaustive tiny-instance optimum."""
from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lowcongest.families import wheel_graph
from lowcongest.graph import AnnotatedGraph, bfs_tree
from lowcongest.shortcuts import (
    Partition,
    QualityReport,
    Shortcut,
    ShortcutError,
    block,
    brute_force_optimal,
    congestion,
    part_block,
    quality,
    validate_parts,
)


def path_graph(n):
    return AnnotatedGraph.build(n, [(i, i + 1, 1) for i in range(n - 1)])


# -- validate_parts -------------------------------------------------------------


def test_parts_ok_on_edge():
    g = path_graph(2)
    assert validate_parts(g, Partition.of([[0], [1]])) == []


def test_parts_disconnected_flagged():
    g = path_graph(3)
    bad = validate_parts(g, Partition.of([[0, 2]]))
    assert any("disconnected" in b for b in bad)


def test_parts_overlap_flagged():
    g = path_graph(3)
    bad = validate_parts(g, Partition.of([[0, 1], [1, 2]]))
    assert any("overlap" in b and "1" in b for b in bad)


# -- congestion / block -----------------------------------------------------------


def test_congestion_empty():
    g = path_graph(3)
    t = bfs_tree(g, 0)
    sc = Shortcut.of(t, [[], []])
    assert congestion(sc) == 0


def test_congestion_counts_sharing():
    g = path_graph(3)
    t = bfs_tree(g, 0)
    e1, e2 = (0, 1), (1, 2)
    sc = Shortcut.of(t, [[e1, e2], [e2]])
    assert congestion(sc) == 2


def test_wheel_single_part_congestion_one():
    g = wheel_graph(9)
    t = bfs_tree(g, 8)  # star tree through the hub
    p = Partition.of([range(8)])
    sc = Shortcut.of(t, [[(i, 8) for i in range(8)]])
    assert congestion(sc) == 1
    assert block(g, p, sc) == 1  # the star is one component


def test_block_empty_shortcut_counts_singletons():
    g = path_graph(5)
    t = bfs_tree(g, 0)
    p = Partition.of([range(5)])
    sc = Shortcut.of(t, [[]])
    assert block(g, p, sc) == 5


def test_block_full_tree_is_one():
    g = path_graph(5)
    t = bfs_tree(g, 0)
    p = Partition.of([range(5)])
    sc = Shortcut.of(t, [t.edges_sorted()])
    assert block(g, p, sc) == 1


def test_shortcut_validation_rejects_nontree_edges():
    g = AnnotatedGraph.build(3, [(0, 1, 1), (1, 2, 1), (0, 2, 1)])
    t = bfs_tree(g, 0)
    nontree = next(e for e in [(0, 1), (1, 2), (0, 2)] if e not in t.edge_pairs)
    sc = Shortcut.of(t, [[nontree]])
    assert sc.validate()


# -- quality -----------------------------------------------------------------------


def _fixed_report(b, c, d):
    return QualityReport(congestion=c, block=b, diameter_used=d, quality=b * d + c)


def test_quality_formula_cases():
    assert _fixed_report(1, 0, 7).quality == 7
    assert _fixed_report(2, 3, 5).quality == 13
    assert _fixed_report(3, 7, 10).quality == 37


def test_quality_report_invariant_enforced():
    with pytest.raises(ShortcutError):
        QualityReport(congestion=1, block=1, diameter_used=5, quality=3)


def test_quality_requires_positive_d():
    g = path_graph(3)
    t = bfs_tree(g, 0)
    p = Partition.of([range(3)])
    sc = Shortcut.of(t, [[]])
    with pytest.raises(ShortcutError):
        quality(g, p, sc, 0)


def naive_congestion(sc: Shortcut) -> int:
    worst = 0
    for e in sc.tree.edge_pairs:
        worst = max(worst, sum(1 for es in sc.edge_sets if e in es))
    return worst


def naive_block(g, parts: Partition, sc: Shortcut) -> int:
    worst = 0
    for part, es in zip(parts.parts, sc.edge_sets):
        comp_of = {}
        nxt = 0
        verts = set(part) | {v for e in es for v in e}
        adj = {v: set() for v in verts}
        for u, v in es:
            adj[u].add(v)
            adj[v].add(u)
        for s in sorted(verts):
            if s in comp_of:
                continue
            stack = [s]
            comp_of[s] = nxt
            while stack:
                x = stack.pop()
                for y in adj[x]:
                    if y not in comp_of:
                        comp_of[y] = nxt
                        stack.append(y)
            nxt += 1
        worst = max(worst, len({comp_of[v] for v in part}))
    return worst


def random_instance(seed):
    rng = random.Random(seed)
    n = rng.randint(3, 14)
    edges = {(rng.randrange(i), i) for i in range(1, n)}
    for _ in range(n):
        a, b = rng.randrange(n), rng.randrange(n)
        if a != b:
            edges.add((min(a, b), max(a, b)))
    g = AnnotatedGraph.build(n, [(u, v, 1) for u, v in edges])
    t = bfs_tree(g, 0)
    # random connected parts by claiming BFS
    k = rng.randint(1, 3)
    seeds = rng.sample(range(n), k)
    owner = {s: i for i, s in enumerate(seeds)}
    frontier = list(seeds)
    while frontier:
        v = frontier.pop(0)
        for u, _e in g.adjacency[v]:
            if u not in owner and rng.random() < 0.8:
                owner[u] = owner[v]
                frontier.append(u)
    groups = {}
    for v, i in owner.items():
        groups.setdefault(i, set()).add(v)
    parts = Partition.of([groups[i] for i in sorted(groups)])
    return g, t, parts


@pytest.mark.parametrize("seed", range(25))
def test_metrics_match_naive_recount(seed):
    g, t, parts = random_instance(seed)
    rng = random.Random(seed + 999)
    tedges = t.edges_sorted()
    edge_sets = []
    for _ in parts.parts:
        edge_sets.append([e for e in tedges if rng.random() < 0.5])
    sc = Shortcut.of(t, edge_sets)
    assert congestion(sc) == naive_congestion(sc)
    assert block(g, parts, sc) == naive_block(g, parts, sc)


@given(st.integers(0, 10_000), st.data())
@settings(max_examples=50, deadline=None)
def test_monotonicity_adding_edges(seed, data):
    g, t, parts = random_instance(seed)
    if not parts.parts:
        return
    tedges = t.edges_sorted()
    rng = random.Random(seed)
    base = [frozenset(e for e in tedges if rng.random() < 0.4) for _ in parts.parts]
    i = data.draw(st.integers(0, len(parts.parts) - 1))
    extra = data.draw(st.sets(st.sampled_from(tedges), max_size=len(tedges)))
    grown = list(base)
    grown[i] = base[i] | extra
    sc0 = Shortcut(tree=t, edge_sets=tuple(base))
    sc1 = Shortcut(tree=t, edge_sets=tuple(grown))
    assert part_block(parts.parts[i], grown[i]) <= part_block(parts.parts[i], base[i])
    assert congestion(sc1) >= congestion(sc0)


# -- brute force optimum --------------------------------------------------------------


def full_enumeration_optimum(g, parts: Partition, t, d):
    """Plain itertools sweep over every per-edge part subset."""
    tedges = t.edges_sorted()
    m = len(parts.parts)
    best = None
    for assign in itertools.product(range(1 << m), repeat=len(tedges)):
        edge_sets = [
            frozenset(tedges[j] for j in range(len(tedges)) if assign[j] >> i & 1)
            for i in range(m)
        ]
        sc = Shortcut(tree=t, edge_sets=tuple(edge_sets))
        q = block(g, parts, sc) * d + congestion(sc)
        total = sum(len(es) for es in edge_sets)
        key = (q, total, assign)
        if best is None or key < best[0]:
            best = (key, sc)
    return best


def test_brute_force_zero_parts():
    g = path_graph(3)
    t = bfs_tree(g, 0)
    sc, rep = brute_force_optimal(g, Partition.of([]), t)
    assert rep.quality == 0 and sc.edge_sets == ()


def test_brute_force_path_example():
    g = path_graph(3)
    t = bfs_tree(g, 0)
    p = Partition.of([range(3)])
    sc, rep = brute_force_optimal(g, p, t, d=2)
    assert rep.block == 1 and rep.congestion == 1 and rep.quality == 3
    assert sc.edge_sets[0] == frozenset({(0, 1), (1, 2)})
    # the stated alternatives
    empty = Shortcut.of(t, [[]])
    one = Shortcut.of(t, [[(0, 1)]])
    assert block(g, p, empty) * 2 + congestion(empty) == 6
    assert block(g, p, one) * 2 + congestion(one) == 5


def test_brute_force_wheel_hub4():
    g = wheel_graph(5)
    t = bfs_tree(g, 4)  # star tree, diameter 2
    p = Partition.of([range(4)])
    sc, rep = brute_force_optimal(g, p, t, d=2)
    assert rep.quality == 3 and rep.block == 1 and rep.congestion == 1
    assert sc.edge_sets[0] == frozenset((i, 4) for i in range(4))


def test_brute_force_too_large_rejected():
    g = path_graph(15)
    t = bfs_tree(g, 0)
    p = Partition.of([range(7), range(7, 15)])
    with pytest.raises(ShortcutError):
        brute_force_optimal(g, p, t)


def test_brute_force_dominates_random_alternatives():
    # 100+ tiny instances: the optimum never loses to a sampled assignment
    rng = random.Random(123)
    checked = 0
    while checked < 100:
        g, t, parts = random_instance(rng.randrange(10**6))
        tedges = t.edges_sorted()
        if not parts.parts or len(tedges) * len(parts.parts) > 16:
            continue
        d = max(1, t.diameter)
        _sc, rep = brute_force_optimal(g, parts, t, d=d)
        for _ in range(20):
            alt = [
                frozenset(e for e in tedges if rng.random() < 0.5)
                for _ in parts.parts
            ]
            sc_alt = Shortcut(tree=t, edge_sets=tuple(alt))
            q_alt = block(g, parts, sc_alt) * d + congestion(sc_alt)
            assert rep.quality <= q_alt
        checked += 1


@pytest.mark.parametrize("seed", range(12))
def test_brute_force_matches_full_enumeration(seed):
    rng = random.Random(seed)
    while True:
        g, t, parts = random_instance(rng.randrange(10_000))
        bits = len(t.edges_sorted()) * len(parts.parts)
        if 0 < bits <= 10:
            break
    d = max(1, t.diameter)
    sc, rep = brute_force_optimal(g, parts, t, d=d)
    (key, ref_sc) = full_enumeration_optimum(g, parts, t, d)
    assert rep.quality == key[0]
    assert sum(len(es) for es in sc.edge_sets) == key[1]
    assert sc.edge_sets == ref_sc.edge_sets
