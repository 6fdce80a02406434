"""Flat-file JSON formats for graphs, parts, shortcuts, decompositions, gates.

All writers emit canonical JSON (sorted keys, fixed separators, trailing
newline) so identical inputs produce byte-identical files.  Rational weights
serialize as plain integers when whole and as "p/q" strings otherwise.
"""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any

from .decomposition import CliqueSumTree, TreeDecomposition
from .gates import CombinatorialGate
from .graph import AnnotatedGraph, GraphError, RootedTree, VortexSpec, as_weight, tree_diameter
from .shortcuts import Partition, Shortcut


def _dump(obj: Any, path: str | Path) -> None:
    text = json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"
    Path(path).write_text(text)


def _load(path: str | Path) -> Any:
    return json.loads(Path(path).read_text())


def _weight_out(w: Fraction):
    return int(w) if w.denominator == 1 else f"{w.numerator}/{w.denominator}"


# -- graphs -----------------------------------------------------------------


def graph_to_obj(g: AnnotatedGraph) -> dict:
    obj: dict[str, Any] = {
        "n": g.n,
        "edges": [[u, v, _weight_out(w)] for u, v, w in g.edges],
    }
    if g.rotation is not None:
        obj["rotation"] = [list(r) if r is not None else None for r in g.rotation]
    if g.apices:
        obj["apices"] = list(g.apices)
    if g.vortices:
        obj["vortices"] = [
            {
                "boundary": list(vx.boundary),
                "internals": [[v, [lo, hi]] for v, (lo, hi) in vx.internals],
                "depth": vx.depth,
            }
            for vx in g.vortices
        ]
    return obj


def graph_from_obj(obj: dict) -> AnnotatedGraph:
    vortices = []
    for vo in obj.get("vortices", []):
        vortices.append(
            VortexSpec(
                boundary=tuple(vo["boundary"]),
                internals=tuple((int(v), (int(a[0]), int(a[1]))) for v, a in vo["internals"]),
                depth=int(vo["depth"]),
            )
        )
    return AnnotatedGraph.build(
        n=int(obj["n"]),
        edges=[(int(u), int(v), as_weight(w)) for u, v, w in obj["edges"]],
        rotation=obj.get("rotation"),
        apices=obj.get("apices", []),
        vortices=vortices,
    )


def save_graph(g: AnnotatedGraph, path: str | Path) -> None:
    _dump(graph_to_obj(g), path)


def load_graph(path: str | Path) -> AnnotatedGraph:
    g = graph_from_obj(_load(path))
    bad = g.validate()
    if bad:
        raise GraphError(f"{path}: " + "; ".join(bad))
    return g


# -- parts --------------------------------------------------------------------


def save_parts(p: Partition, path: str | Path) -> None:
    _dump({"parts": [sorted(part) for part in p.parts]}, path)


def load_parts(path: str | Path) -> Partition:
    obj = _load(path)
    return Partition.of(obj["parts"])


# -- shortcuts ----------------------------------------------------------------


def save_shortcut(s: Shortcut, path: str | Path) -> None:
    tree_edges = s.tree.edges_sorted()
    index = {e: i for i, e in enumerate(tree_edges)}
    obj = {
        "tree_edges": [list(e) for e in tree_edges],
        "H": [sorted(index[e] for e in es) for es in s.edge_sets],
        "root": s.tree.root,
    }
    _dump(obj, path)


def load_shortcut(path: str | Path, g: AnnotatedGraph) -> Shortcut:
    obj = _load(path)
    tree_edges = [(int(u), int(v)) for u, v in obj["tree_edges"]]
    root = int(obj.get("root", 0))
    tree = _tree_from_edges(g.n, tree_edges, root)
    edge_sets = tuple(
        frozenset(tree_edges[i] for i in idxs) for idxs in obj["H"]
    )
    return Shortcut(tree=tree, edge_sets=edge_sets)


def _tree_from_edges(n: int, edges: list[tuple[int, int]], root: int) -> RootedTree:
    adj: dict[int, list[int]] = {}
    for u, v in edges:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    parent: list[int | None] = [None] * n
    depth: list[int | None] = [None] * n
    depth[root] = 0
    stack = [root]
    while stack:
        v = stack.pop()
        for u in sorted(adj.get(v, ())):
            if depth[u] is None:
                depth[u] = depth[v] + 1
                parent[u] = v
                stack.append(u)
    covered = [v for v in range(n) if depth[v] is not None]
    return RootedTree(
        root=root,
        parent=tuple(parent),
        depth_of=tuple(depth),
        diameter=tree_diameter(parent, covered),
    )


def save_tree(t: RootedTree, path: str | Path) -> None:
    _dump({"edges": [list(e) for e in t.edges_sorted()], "root": t.root}, path)


def load_tree(path: str | Path, g: AnnotatedGraph) -> RootedTree:
    obj = _load(path)
    return _tree_from_edges(g.n, [(int(u), int(v)) for u, v in obj["edges"]], int(obj.get("root", 0)))


# -- decompositions -------------------------------------------------------------


def save_decomposition(td: TreeDecomposition | CliqueSumTree, path: str | Path) -> None:
    if isinstance(td, CliqueSumTree):
        obj = {
            "bags": [sorted(b) for b in td.bags],
            "edges": [
                [
                    a,
                    b,
                    {
                        "clique": sorted(frozenset().union(*cl)) if cl else [],
                        "double": len(cl) > 1,
                        **({"halves": [sorted(h) for h in cl]} if len(cl) > 1 else {}),
                    },
                ]
                for a, b, cl in td.links
            ],
            "root": td.root,
            "k": td.k,
            "kind": "cliquesum",
        }
    else:
        obj = {
            "bags": [sorted(b) for b in td.bags],
            "edges": [[a, b, {"clique": sorted(td.bags[a] & td.bags[b]), "double": False}] for a, b in td.tree],
            "root": 0,
            "kind": "treewidth",
        }
    _dump(obj, path)


def load_decomposition(path: str | Path) -> TreeDecomposition | CliqueSumTree:
    obj = _load(path)
    if obj.get("kind") == "cliquesum" or "k" in obj:
        links = []
        for a, b, meta in obj["edges"]:
            if meta.get("double"):
                cliques = tuple(frozenset(h) for h in meta["halves"])
            else:
                cliques = (frozenset(meta["clique"]),)
            links.append((int(a), int(b), cliques))
        return CliqueSumTree.of(obj["bags"], links, int(obj["root"]), int(obj["k"]))
    return TreeDecomposition.of(obj["bags"], [(int(a), int(b)) for a, b, _m in obj["edges"]])


# -- gates ----------------------------------------------------------------------


def save_gate(gate: CombinatorialGate, path: str | Path) -> None:
    obj = {
        "pairs": [{"F": sorted(f), "S": sorted(s)} for f, s in gate.pairs],
        "s": gate.s_param,
    }
    _dump(obj, path)


def load_gate(path: str | Path) -> CombinatorialGate:
    obj = _load(path)
    return CombinatorialGate(
        pairs=tuple((frozenset(p["F"]), frozenset(p["S"])) for p in obj["pairs"]),
        s_param=int(obj["s"]),
    )
