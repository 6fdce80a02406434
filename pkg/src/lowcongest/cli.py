"""Command-line interface: gen, build, verify, sim, bench, calibrate.

Exit code 0 only when every validator involved in the invocation passes.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import fileio
from .construct import ConstructorConfig, auto_shortcut
from .decomposition import CliqueSumTree, validate_decomposition
from .families import FAMILIES, FamilySpec, generate
from .graph import AnnotatedGraph, bfs_tree
from .harness import (
    check_regressions,
    default_corpus,
    fit_constants,
    load_constants,
    run_experiment,
    save_constants,
    write_csv,
)
from .shortcuts import quality, validate_parts
from .sim import SimConfig, boruvka_mst, empty_shortcut_provider, kruskal_mst


def _parse_params(items: list[str]) -> dict[str, int]:
    out: dict[str, int] = {}
    for item in items:
        for chunk in item.split(","):
            if not chunk:
                continue
            k, _, v = chunk.partition("=")
            out[k.strip()] = int(v)
    return out


def _tree_for(g: AnnotatedGraph, arg: str):
    if arg.startswith("bfs:"):
        return bfs_tree(g, int(arg[4:]))
    if arg.startswith("file:"):
        return fileio.load_tree(arg[5:], g)
    raise SystemExit(f"bad --tree value {arg!r}; use bfs:<root> or file:<path>")


def cmd_gen(args) -> int:
    spec = FamilySpec(args.family, _parse_params(args.param), args.seed)
    inst = generate(spec)
    bad = inst.graph.validate() + validate_parts(inst.graph, inst.parts)
    if inst.cliquesum is not None:
        bad += validate_decomposition(inst.graph, inst.cliquesum)
    fileio.save_graph(inst.graph, args.out)
    if args.parts_out:
        fileio.save_parts(inst.parts, args.parts_out)
    if args.decomp_out and inst.cliquesum is not None:
        fileio.save_decomposition(inst.cliquesum, args.decomp_out)
    if bad:
        print("\n".join(bad), file=sys.stderr)
        return 1
    print(f"wrote {args.out}: n={inst.graph.n} m={len(inst.graph.edges)} [{spec.label()}]")
    return 0


def cmd_build(args) -> int:
    g = fileio.load_graph(args.graph)
    parts = fileio.load_parts(args.parts)
    bad = validate_parts(g, parts)
    if bad:
        print("\n".join(bad), file=sys.stderr)
        return 1
    t = _tree_for(g, args.tree)
    cst = None
    if args.decomp:
        loaded = fileio.load_decomposition(args.decomp)
        if not isinstance(loaded, CliqueSumTree):
            from .decomposition import td_to_cliquesum

            loaded = td_to_cliquesum(loaded)
        cst = loaded
    cfg = ConstructorConfig(method=args.method, compression=not args.no_compress, seed=args.seed)
    sc = auto_shortcut(g, t, parts, cfg, cliquesum=cst)
    bad = sc.validate()
    fileio.save_shortcut(sc, args.out)
    rep = quality(g, parts, sc, max(1, t.diameter))
    print(
        f"wrote {args.out}: block={rep.block} congestion={rep.congestion} "
        f"d_T={rep.diameter_used} quality={rep.quality}"
    )
    if bad:
        print("\n".join(bad), file=sys.stderr)
        return 1
    return 0


def cmd_verify(args) -> int:
    bad: list[str] = []
    g = None
    if args.graph:
        g = fileio.load_graph(args.graph)
        bad += g.validate()
    parts = None
    if args.parts:
        if g is None:
            raise SystemExit("--parts needs --graph")
        parts = fileio.load_parts(args.parts)
        bad += validate_parts(g, parts)
    if args.shortcut:
        if g is None:
            raise SystemExit("--shortcut needs --graph")
        sc = fileio.load_shortcut(args.shortcut, g)
        bad += sc.validate()
        bad += sc.tree.validate_against(g)
    if args.decomp:
        if g is None:
            raise SystemExit("--decomp needs --graph")
        td = fileio.load_decomposition(args.decomp)
        bad += validate_decomposition(g, td)
    if bad:
        print("\n".join(bad), file=sys.stderr)
        print(f"FAIL: {len(bad)} violation(s)")
        return 1
    print("OK")
    return 0


def cmd_sim(args) -> int:
    g = fileio.load_graph(args.graph)
    t = bfs_tree(g, args.root)
    cfg = ConstructorConfig(method=args.method, seed=args.seed)
    cst = fileio.load_decomposition(args.decomp) if args.decomp else None
    if cst is not None and not isinstance(cst, CliqueSumTree):
        from .decomposition import td_to_cliquesum

        cst = td_to_cliquesum(cst)
    if args.baseline:
        provider = empty_shortcut_provider(t)
    else:
        provider = lambda parts: auto_shortcut(g, t, parts, cfg, cliquesum=cst)
    sim_cfg = SimConfig(seed=args.seed, bits_per_edge_per_round=args.budget)
    tracebuf: list | None = [] if args.trace else None
    mst, stats, phases = boruvka_mst(
        g, provider, sim_cfg, phase_surcharge=args.phase_surcharge, trace=tracebuf
    )
    ok = mst == kruskal_mst(g)
    lines = ["metric,value"]
    lines.append(f"rounds,{stats.rounds_used}")
    lines.append(f"messages,{stats.messages_sent}")
    lines.append(f"max_edge_bits,{stats.max_edge_bits_any_round}")
    lines.append(f"phases,{phases}")
    lines.append(f"mst_edges,{len(mst)}")
    lines.append(f"mst_matches_reference,{ok}")
    Path(args.csv).write_text("\n".join(lines) + "\n")
    if tracebuf is not None:
        rows = ["round,edge,part,bits"]
        rows += [f"{r},{eid},{part},{bits}" for r, eid, part, bits in tracebuf]
        Path(args.trace).write_text("\n".join(rows) + "\n")
    print(f"wrote {args.csv}: rounds={stats.rounds_used} phases={phases} mst_ok={ok}")
    return 0 if ok else 1


def cmd_bench(args) -> int:
    if args.families:
        fams = args.families.split(",")
        specs = [s for s in default_corpus(args.seed) if s.family in fams]
    else:
        specs = default_corpus(args.seed)
    rows = run_experiment(
        specs,
        methods=args.methods.split(","),
        trials=args.trials,
        timing=not args.no_timing,
        sim_mst=not args.no_mst,
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "bench.csv"
    write_csv(rows, csv_path)
    n_bad = sum(1 for r in rows if r.values.get("status") != "ok")
    print(f"wrote {csv_path}: {len(rows)} rows, {n_bad} failures")
    if not args.no_figures:
        from .report import render_figures

        for p in render_figures(rows, out_dir):
            print(f"wrote {p}")
    return 0 if n_bad == 0 else 1


def cmd_calibrate(args) -> int:
    import csv as _csv

    from .harness import ExperimentRow, calibrate_full

    if args.full:
        fresh = calibrate_full(args.seed)
    else:
        if not args.csv:
            raise SystemExit("calibrate needs --csv or --full")
        rows = []
        with open(args.csv) as fh:
            for rec in _csv.DictReader(fh):
                vals: dict = dict(rec)
                for key in ("n", "m", "d_T", "block", "congestion", "quality", "agg_rounds", "mst_rounds"):
                    if vals.get(key):
                        vals[key] = int(float(vals[key]))
                rows.append(ExperimentRow(values=vals))
        fresh = fit_constants(rows)
    if args.check and Path(args.out).exists():
        stored = load_constants(args.out)
        flags = check_regressions(fresh, stored)
        if flags:
            print("\n".join(flags), file=sys.stderr)
            return 1
        print("no regressions")
        return 0
    save_constants(fresh, args.out)
    print(f"wrote {args.out}: {fresh}")
    return 0


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="lowcongest", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("gen", help="generate a family instance")
    p.add_argument("--family", required=True, choices=FAMILIES)
    p.add_argument("--param", action="append", default=[], help="k=8 or n=32,depth=2")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--parts-out")
    p.add_argument("--decomp-out")
    p.set_defaults(fn=cmd_gen)

    p = sub.add_parser("build", help="construct a shortcut")
    p.add_argument("--method", default="auto", choices=["cliquesum", "treewidth", "apex", "auto"])
    p.add_argument("--graph", required=True)
    p.add_argument("--parts", required=True)
    p.add_argument("--tree", default="bfs:0", help="bfs:<root> or file:<path>")
    p.add_argument("--decomp", help="clique-sum decomposition file")
    p.add_argument("--out", required=True)
    p.add_argument("--no-compress", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_build)

    p = sub.add_parser("verify", help="validate files; exit 0 iff all pass")
    p.add_argument("--graph")
    p.add_argument("--parts")
    p.add_argument("--shortcut")
    p.add_argument("--decomp")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("sim", help="run the CONGEST simulator")
    p.add_argument("what", choices=["mst"])
    p.add_argument("--graph", required=True)
    p.add_argument("--method", default="auto", choices=["cliquesum", "treewidth", "apex", "auto"])
    p.add_argument("--decomp")
    p.add_argument("--csv", required=True)
    p.add_argument("--trace", help="per-round message dump CSV")
    p.add_argument("--root", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=None, help="bits per edge per round")
    p.add_argument("--baseline", action="store_true", help="no shortcut edges")
    p.add_argument("--phase-surcharge", type=int, default=0)
    p.set_defaults(fn=cmd_sim)

    p = sub.add_parser("bench", help="run the corpus sweep, write CSV + figures")
    p.add_argument("--out-dir", default="results")
    p.add_argument("--families", help="comma-separated family filter")
    p.add_argument("--methods", default="auto")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("--no-timing", action="store_true", help="zero wall_ms for byte-stable output")
    p.add_argument("--no-mst", action="store_true")
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("calibrate", help="fit constants from a bench CSV")
    p.add_argument("--csv", default="", help="bench CSV to fit from")
    p.add_argument("--full", action="store_true",
                   help="run the standing corpus plus depth/oracle suites in-process")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="calibration.json")
    p.add_argument("--check", action="store_true", help="flag regressions against stored constants")
    p.set_defaults(fn=cmd_calibrate)

    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
