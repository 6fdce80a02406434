"""End-to-end CLI: gen -> build -> verify -> sim, plus bench and calibrate."""
from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import pytest

PKG = Path(__file__).resolve().parents[1]


def run_cli(*args, cwd=None):
    return subprocess.run(
        [sys.executable, "-m", "lowcongest.cli", *args],
        capture_output=True,
        text=True,
        cwd=cwd or PKG,
    )


def test_full_pipeline(tmp_path):
    g = tmp_path / "g.json"
    p = tmp_path / "p.json"
    s = tmp_path / "s.json"
    r = run_cli("gen", "--family", "grid", "--param", "k=5", "--seed", "2",
                "--out", str(g), "--parts-out", str(p))
    assert r.returncode == 0, r.stderr
    r = run_cli("build", "--graph", str(g), "--parts", str(p), "--tree", "bfs:0",
                "--out", str(s), "--seed", "2")
    assert r.returncode == 0, r.stderr
    assert "block=" in r.stdout
    r = run_cli("verify", "--graph", str(g), "--parts", str(p), "--shortcut", str(s))
    assert r.returncode == 0 and "OK" in r.stdout
    csv = tmp_path / "rounds.csv"
    r = run_cli("sim", "mst", "--graph", str(g), "--method", "auto", "--csv", str(csv))
    assert r.returncode == 0, r.stderr
    text = csv.read_text()
    assert "mst_matches_reference,True" in text


def test_cliquesum_pipeline(tmp_path):
    g, p, d, s = (tmp_path / x for x in ("g.json", "p.json", "d.json", "s.json"))
    r = run_cli("gen", "--family", "cliquesum_chain", "--param", "bags=16,k=2",
                "--out", str(g), "--parts-out", str(p), "--decomp-out", str(d))
    assert r.returncode == 0, r.stderr
    r = run_cli("build", "--method", "cliquesum", "--graph", str(g), "--parts", str(p),
                "--decomp", str(d), "--out", str(s))
    assert r.returncode == 0, r.stderr
    r = run_cli("verify", "--graph", str(g), "--decomp", str(d), "--shortcut", str(s))
    assert r.returncode == 0


def test_verify_rejects_corrupted_shortcut(tmp_path):
    g, p, s = (tmp_path / x for x in ("g.json", "p.json", "s.json"))
    run_cli("gen", "--family", "grid", "--param", "k=4", "--out", str(g), "--parts-out", str(p))
    run_cli("build", "--graph", str(g), "--parts", str(p), "--out", str(s))
    obj = json.loads(s.read_text())
    obj["tree_edges"][0] = [0, 15]  # not a host edge
    s.write_text(json.dumps(obj))
    r = run_cli("verify", "--graph", str(g), "--shortcut", str(s))
    assert r.returncode == 1
    assert "FAIL" in r.stdout


def test_sim_baseline_and_trace(tmp_path):
    g = tmp_path / "g.json"
    run_cli("gen", "--family", "wheel", "--param", "n=33", "--out", str(g))
    csv1, csv2 = tmp_path / "a.csv", tmp_path / "b.csv"
    trace = tmp_path / "trace.csv"
    r = run_cli("sim", "mst", "--graph", str(g), "--csv", str(csv1), "--trace", str(trace))
    assert r.returncode == 0, r.stderr
    assert trace.read_text().startswith("round,edge,part,bits")
    r = run_cli("sim", "mst", "--graph", str(g), "--csv", str(csv2), "--baseline")
    assert r.returncode == 0

    def rounds(p):
        for line in p.read_text().splitlines():
            if line.startswith("rounds,"):
                return int(line.split(",")[1])

    assert rounds(csv1) < rounds(csv2)


def test_bench_and_calibrate(tmp_path):
    out = tmp_path / "results"
    r = run_cli("bench", "--out-dir", str(out), "--families", "grid,cycle",
                "--no-timing", "--no-mst")
    assert r.returncode == 0, r.stderr
    csv = out / "bench.csv"
    assert csv.exists()
    assert (out / "metrics_scaling.png").exists()
    cal = tmp_path / "calibration.json"
    r = run_cli("calibrate", "--csv", str(csv), "--out", str(cal))
    assert r.returncode == 0, r.stderr
    consts = json.loads(cal.read_text())
    assert "block_per_dt" in consts
    r = run_cli("calibrate", "--csv", str(csv), "--out", str(cal), "--check")
    assert r.returncode == 0 and "no regressions" in r.stdout


def test_bench_deterministic_bytes(tmp_path):
    outs = []
    for name in ("r1", "r2"):
        out = tmp_path / name
        r = run_cli("bench", "--out-dir", str(out), "--families", "cycle",
                    "--no-timing", "--no-figures")
        assert r.returncode == 0, r.stderr
        outs.append((out / "bench.csv").read_bytes())
    assert outs[0] == outs[1]


def test_gen_exit_code_on_bad_params(tmp_path):
    r = run_cli("gen", "--family", "grid", "--param", "k=0", "--out", str(tmp_path / "g.json"))
    assert r.returncode != 0
    assert "error:" in r.stderr


def test_build_with_tree_file(tmp_path):
    g, p, s, tr = (tmp_path / x for x in ("g.json", "p.json", "s.json", "t.json"))
    run_cli("gen", "--family", "grid", "--param", "k=4", "--out", str(g), "--parts-out", str(p))
    code = (
        "import sys; sys.path.insert(0, 'src');"
        "from lowcongest import fileio, bfs_tree;"
        f"g = fileio.load_graph(r'{g}');"
        f"fileio.save_tree(bfs_tree(g, 5), r'{tr}')"
    )
    subprocess.run([sys.executable, "-c", code], cwd=PKG, check=True)
    r = run_cli("build", "--graph", str(g), "--parts", str(p),
                "--tree", f"file:{tr}", "--out", str(s))
    assert r.returncode == 0, r.stderr
    r = run_cli("verify", "--graph", str(g), "--shortcut", str(s))
    assert r.returncode == 0
