"""Generators, file formats, harness sweeps, calibration, figures."""
from __future__ import annotations

import json
import random
from pathlib import Path

import pytest

from lowcongest import fileio
from lowcongest.decomposition import validate_decomposition
from lowcongest.families import FAMILIES, FamilySpec, GeneratedInstance, generate
from lowcongest.graph import AnnotatedGraph, GraphError, bfs_tree
from lowcongest.harness import (
    CSV_COLUMNS,
    check_regressions,
    default_corpus,
    fit_constants,
    load_constants,
    rows_to_csv,
    run_experiment,
    save_constants,
)
from lowcongest.shortcuts import Partition, validate_parts

SMOKE_SPECS = [
    FamilySpec("grid", {"k": 4}, 1),
    FamilySpec("cycle", {"n": 10}, 1),
    FamilySpec("wheel", {"n": 9}, 1),
    FamilySpec("random_planar", {"n": 24}, 1),
    FamilySpec("apexed_planar", {"n": 20, "q": 2}, 1),
    FamilySpec("planar_with_vortex", {"n": 12, "internals": 3, "depth": 2}, 1),
    FamilySpec("planar_with_vortex", {"n": 12, "internals": 2, "depth": 2, "q": 1}, 1),
    FamilySpec("cliquesum_chain", {"bags": 12, "k": 2}, 1),
    FamilySpec("cliquesum_tree", {"bags": 12, "k": 3}, 1),
]


@pytest.mark.parametrize("spec", SMOKE_SPECS, ids=lambda s: s.label())
def test_generated_instances_validate(spec):
    inst = generate(spec)
    assert inst.graph.validate() == []
    assert validate_parts(inst.graph, inst.parts) == []
    if inst.cliquesum is not None:
        assert validate_decomposition(inst.graph, inst.cliquesum) == []


def test_wheel_instance_shape():
    inst = generate(FamilySpec("wheel", {"n": 9}, 0))
    g = inst.graph
    assert g.apices == (8,)
    assert g.rotation[8] is None
    emb = g.embedding()
    assert len(emb.faces) == 2  # the rim cycle only
    assert inst.parts.parts == (frozenset(range(8)),)


def test_cliquesum_chain_has_linear_depth():
    inst = generate(FamilySpec("cliquesum_chain", {"bags": 32, "k": 2}, 0))
    assert inst.cliquesum is not None
    assert inst.cliquesum.depth() == 32
    assert validate_decomposition(inst.graph, inst.cliquesum) == []


def test_vortex_instance_invariants():
    inst = generate(FamilySpec("planar_with_vortex", {"n": 8, "internals": 3, "depth": 2}, 3))
    g = inst.graph
    assert len(g.vortices) == 1
    vx = g.vortices[0]
    per_vertex = {}
    for v, (lo, hi) in vx.internals:
        for p in vx.arc_positions(lo, hi):
            b = vx.boundary[p]
            per_vertex[b] = per_vertex.get(b, 0) + 1
    assert all(c <= vx.depth for c in per_vertex.values())
    assert g.validate() == []


def test_generation_deterministic():
    for spec in SMOKE_SPECS:
        a, b = generate(spec), generate(spec)
        assert a.graph == b.graph
        assert a.parts == b.parts
        assert a.cliquesum == b.cliquesum


def test_unknown_family_rejected():
    with pytest.raises(GraphError):
        FamilySpec("moebius", {}, 0)


# -- file round trips -------------------------------------------------------------


def test_graph_roundtrip(tmp_path):
    for spec in SMOKE_SPECS:
        inst = generate(spec)
        p = tmp_path / "g.json"
        fileio.save_graph(inst.graph, p)
        g2 = fileio.load_graph(p)
        assert g2 == inst.graph


def test_fraction_weights_roundtrip(tmp_path):
    from fractions import Fraction

    g = AnnotatedGraph.build(2, [(0, 1, Fraction(7, 3))])
    p = tmp_path / "g.json"
    fileio.save_graph(g, p)
    g2 = fileio.load_graph(p)
    assert g2.edges[0][2] == Fraction(7, 3)
    assert json.loads(p.read_text())["edges"][0][2] == "7/3"


def test_parts_shortcut_roundtrip(tmp_path):
    inst = generate(FamilySpec("grid", {"k": 4}, 2))
    from lowcongest.construct import auto_shortcut

    t = bfs_tree(inst.graph, 0)
    sc = auto_shortcut(inst.graph, t, inst.parts)
    pp, sp = tmp_path / "p.json", tmp_path / "s.json"
    fileio.save_parts(inst.parts, pp)
    fileio.save_shortcut(sc, sp)
    parts2 = fileio.load_parts(pp)
    sc2 = fileio.load_shortcut(sp, inst.graph)
    assert parts2 == inst.parts
    assert sc2.edge_sets == sc.edge_sets
    assert sc2.tree.edge_pairs == sc.tree.edge_pairs


def test_decomposition_roundtrip(tmp_path):
    inst = generate(FamilySpec("cliquesum_tree", {"bags": 10, "k": 3}, 4))
    from lowcongest.decomposition import compress_cliquesum

    comp = compress_cliquesum(inst.cliquesum)
    p = tmp_path / "d.json"
    fileio.save_decomposition(comp, p)
    loaded = fileio.load_decomposition(p)
    assert loaded.bags == comp.bags
    assert loaded.links == comp.links
    assert loaded.root == comp.root and loaded.k == comp.k


def test_gate_roundtrip(tmp_path):
    from lowcongest.gates import CellPartition, build_planar_gate
    from lowcongest.families import grid_graph

    g = grid_graph(4)
    cells = [[r * 4 + c for r in range(4) for c in range(2)],
             [r * 4 + c for r in range(4) for c in range(2, 4)]]
    gate = build_planar_gate(g, CellPartition.of(g, cells))
    p = tmp_path / "gate.json"
    fileio.save_gate(gate, p)
    g2 = fileio.load_gate(p)
    assert g2 == gate


def test_canonical_json_bytes(tmp_path):
    inst = generate(FamilySpec("grid", {"k": 3}, 5))
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    fileio.save_graph(inst.graph, p1)
    fileio.save_graph(inst.graph, p2)
    assert p1.read_bytes() == p2.read_bytes()


# -- harness -----------------------------------------------------------------------


def test_empty_spec_list_header_only():
    assert rows_to_csv([]) == ",".join(CSV_COLUMNS) + "\n"


def test_grid_sweep_rows_and_validity():
    specs = [FamilySpec("grid", {"k": k}, 0) for k in (4, 6)]
    rows = run_experiment(specs, trials=2, timing=False)
    assert len(rows) == 4
    assert all(r.values["status"] == "ok" for r in rows)
    assert all(r.values["valid"] for r in rows)
    assert all(r.values["mst_ok"] for r in rows)


def test_failures_become_rows():
    # an instance violating part validity must not crash the sweep
    bad = GeneratedInstance(
        spec=FamilySpec("grid", {"k": 3}, 0),
        graph=generate(FamilySpec("grid", {"k": 3}, 0)).graph,
        parts=Partition.of([[0, 8]]),  # disconnected
    )
    from lowcongest.harness import run_instance

    row = run_instance(bad, "auto")
    assert row.values["status"] != "ok"
    assert row.values["valid"] is False


def test_csv_schema_stable():
    rows = run_experiment([FamilySpec("cycle", {"n": 8}, 0)], timing=False)
    text = rows_to_csv(rows)
    header = text.splitlines()[0].split(",")
    assert header == CSV_COLUMNS


def test_calibrate_single_instance_headroom():
    rows = run_experiment([FamilySpec("grid", {"k": 4}, 0)], timing=False)
    consts = fit_constants(rows)
    v = rows[0].values
    assert consts["block_per_dt"] == round(1.25 * v["block"] / v["d_T"], 6)


def test_calibrate_flags_regression(tmp_path):
    rows = run_experiment([FamilySpec("grid", {"k": 4}, 0)], timing=False)
    consts = fit_constants(rows)
    p = tmp_path / "c.json"
    save_constants(consts, p)
    stored = load_constants(p)
    worse = {k: v * 2 for k, v in consts.items()}
    flags = check_regressions(worse, stored)
    assert flags
    assert not check_regressions(consts, stored)


def test_calibrate_reproducible(tmp_path):
    specs = [FamilySpec("grid", {"k": 4}, 0), FamilySpec("wheel", {"n": 9}, 0)]
    outs = []
    for name in ("a.json", "b.json"):
        rows = run_experiment(specs, timing=False)
        save_constants(fit_constants(rows), tmp_path / name)
        outs.append((tmp_path / name).read_bytes())
    assert outs[0] == outs[1]


def test_calibrate_empty_corpus_rejected():
    with pytest.raises(ValueError):
        fit_constants([])


def test_mixed_method_sweep_same_mst():
    # same instance under different methods: the MST (hence its weight) must
    # match the reference either way
    rows = run_experiment(
        [FamilySpec("grid", {"k": 5}, 1)], methods=("auto", "treewidth"), timing=False
    )
    assert len(rows) == 2
    assert all(r.values["status"] == "ok" for r in rows)
    assert all(r.values["mst_ok"] for r in rows)
    rows2 = run_experiment(
        [FamilySpec("cliquesum_chain", {"bags": 10, "k": 2}, 1)],
        methods=("auto", "cliquesum"),
        timing=False,
    )
    assert all(r.values["mst_ok"] for r in rows2)


def test_method_mismatch_recorded_not_raised():
    rows = run_experiment([FamilySpec("wheel", {"n": 9}, 0)], methods=("treewidth",), timing=False)
    assert rows[0].values["status"] != "ok"
    assert "apices" in rows[0].values["status"]


def test_load_graph_rejects_invalid(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"n": 3, "edges": [[0, 1, 1]]}')  # disconnected
    with pytest.raises(GraphError):
        fileio.load_graph(p)


def test_determinism_csv_bytes():
    specs = [FamilySpec("grid", {"k": 4}, 3), FamilySpec("cliquesum_chain", {"bags": 8, "k": 2}, 3)]
    a = rows_to_csv(run_experiment(specs, timing=False))
    b = rows_to_csv(run_experiment(specs, timing=False))
    assert a == b


def test_render_figures(tmp_path):
    from lowcongest.report import render_figures

    rows = run_experiment([FamilySpec("grid", {"k": k}, 0) for k in (4, 6)], timing=False)
    created = render_figures(rows, tmp_path)
    assert len(created) >= 2
    for p in created:
        assert p.exists() and p.stat().st_size > 0
