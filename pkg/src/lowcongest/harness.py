"""Experiment orchestration: sweeps, metric CSV emission, and calibration.

Rows follow a fixed, documented column order; a failed pipeline becomes a
row with a status message instead of crashing the sweep.  Calibration fits
the empirical constants (block vs d_T, congestion vs d_T*log^2 n, compressed
depth vs log^2 bags, simulator rounds vs quality) with 25% headroom and can
flag regressions against a stored constants file.
"""
from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .construct import ConstructorConfig, auto_shortcut
from .decomposition import compress_cliquesum, validate_decomposition
from .families import FamilySpec, GeneratedInstance, generate
from .graph import bfs_tree
from .shortcuts import Partition, block, congestion, quality, validate_parts
from .sim import boruvka_mst, kruskal_mst, simulate_aggregate

CSV_COLUMNS = [
    "family",
    "params",
    "seed",
    "n",
    "m",
    "method",
    "d_T",
    "block",
    "congestion",
    "quality",
    "agg_rounds",
    "agg_messages",
    "mst_rounds",
    "mst_phases",
    "mst_ok",
    "valid",
    "status",
    "wall_ms",
]


@dataclass
class ExperimentRow:
    values: dict

    def as_list(self) -> list:
        return [self.values.get(c, "") for c in CSV_COLUMNS]


def default_corpus(seed: int = 0, full: bool = True) -> list[FamilySpec]:
    """The standing instance corpus exercised by benchmarks and acceptance."""
    specs: list[FamilySpec] = []
    for s in range(3):
        for k in (4, 6, 8):
            specs.append(FamilySpec("grid", {"k": k}, seed + s))
        for n in (12, 24, 48):
            specs.append(FamilySpec("cycle", {"n": n}, seed + s))
        for n in (9, 17, 65):
            specs.append(FamilySpec("wheel", {"n": n}, seed + s))
        for n in (16, 32, 64):
            specs.append(FamilySpec("random_planar", {"n": n}, seed + s))
        for n in (16, 32):
            specs.append(FamilySpec("apexed_planar", {"n": n, "q": 1}, seed + s))
        specs.append(FamilySpec("apexed_planar", {"n": 24, "q": 2}, seed + s))
        for n in (12, 20):
            specs.append(FamilySpec("planar_with_vortex", {"n": n, "internals": 3, "depth": 2}, seed + s))
        specs.append(FamilySpec("planar_with_vortex", {"n": 16, "internals": 2, "depth": 2, "q": 1}, seed + s))
        for bags in (8, 32):
            specs.append(FamilySpec("cliquesum_chain", {"bags": bags, "k": 2}, seed + s))
            specs.append(FamilySpec("cliquesum_tree", {"bags": bags, "k": 3}, seed + s))
    if full:
        specs.append(FamilySpec("grid", {"k": 16}, seed))
        specs.append(FamilySpec("wheel", {"n": 257}, seed))
        specs.append(FamilySpec("cliquesum_chain", {"bags": 128, "k": 2}, seed))
    return specs


def run_instance(inst: GeneratedInstance, method: str, timing: bool = True, sim_mst: bool = True) -> ExperimentRow:
    """One (instance, method) pipeline: build, validate, aggregate, MST."""
    g = inst.graph
    row: dict = {
        "family": inst.spec.family,
        "params": ";".join(f"{k}={v}" for k, v in sorted(inst.spec.parameters.items())),
        "seed": inst.spec.seed,
        "n": g.n,
        "m": len(g.edges),
        "method": method,
        "status": "ok",
        "valid": True,
        "wall_ms": 0,
    }
    t0 = time.perf_counter()
    try:
        bad = g.validate()
        if bad:
            raise ValueError("; ".join(bad))
        bad = validate_parts(g, inst.parts)
        if bad:
            raise ValueError("; ".join(bad))
        if inst.cliquesum is not None:
            bad = validate_decomposition(g, inst.cliquesum)
            if bad:
                raise ValueError("; ".join(bad))
        t = bfs_tree(g, 0)
        d_t = max(1, t.diameter)
        row["d_T"] = d_t
        cfg = ConstructorConfig(method=method, seed=inst.spec.seed)
        sc = auto_shortcut(g, t, inst.parts, cfg, cliquesum=inst.cliquesum)
        bad = sc.validate()
        if bad:
            raise ValueError("; ".join(bad))
        rep = quality(g, inst.parts, sc, d_t)
        row["block"] = rep.block
        row["congestion"] = rep.congestion
        row["quality"] = rep.quality
        values = list(range(g.n))
        res, st, _ = simulate_aggregate(g, inst.parts, sc, "min", values)
        expect = [min(p) for p in inst.parts.parts]
        if res != expect:
            raise ValueError("aggregate mismatch")
        row["agg_rounds"] = st.rounds_used
        row["agg_messages"] = st.messages_sent
        if sim_mst:
            provider = lambda parts: auto_shortcut(g, t, parts, cfg, cliquesum=inst.cliquesum)
            mst, mstats, phases = boruvka_mst(g, provider)
            row["mst_rounds"] = mstats.rounds_used
            row["mst_phases"] = phases
            row["mst_ok"] = mst == kruskal_mst(g)
            if not row["mst_ok"]:
                raise ValueError("MST mismatch against reference")
    except Exception as exc:  # recorded, never crashes the sweep
        row["status"] = f"{type(exc).__name__}: {exc}"
        row["valid"] = False
    if timing:
        row["wall_ms"] = round(1000 * (time.perf_counter() - t0), 3)
    return ExperimentRow(values=row)


def run_experiment(
    specs: Sequence[FamilySpec],
    methods: Sequence[str] = ("auto",),
    trials: int = 1,
    timing: bool = True,
    sim_mst: bool = True,
) -> list[ExperimentRow]:
    rows: list[ExperimentRow] = []
    for spec in specs:
        for trial in range(trials):
            sp = FamilySpec(spec.family, dict(spec.parameters), spec.seed + trial)
            inst = generate(sp)
            for method in methods:
                rows.append(run_instance(inst, method, timing=timing, sim_mst=sim_mst))
    return rows


def rows_to_csv(rows: Iterable[ExperimentRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow(r.as_list())
    return buf.getvalue()


def write_csv(rows: Iterable[ExperimentRow], path: str | Path) -> None:
    Path(path).write_text(rows_to_csv(rows))


# ---------------------------------------------------------------------------
# Calibration
# ---------------------------------------------------------------------------

HEADROOM = 1.25

CONSTANT_KEYS = (
    "block_per_dt",
    "congestion_per_dt_log2",
    "depth_per_log2sq",
    "rounds_alpha",
    "oracle_ratio",
)


def _log2sq(n: int) -> float:
    return max(1.0, math.log2(max(2, n))) ** 2


def fit_constants(rows: Sequence[ExperimentRow], extra: dict | None = None) -> dict:
    """Max observed metric ratios with headroom; raises on an empty corpus."""
    ratios = {k: [] for k in CONSTANT_KEYS}
    for r in rows:
        v = r.values
        if v.get("status") != "ok":
            continue
        d_t = v.get("d_T") or 1
        if "block" in v:
            ratios["block_per_dt"].append(v["block"] / d_t)
        if "congestion" in v:
            ratios["congestion_per_dt_log2"].append(
                v["congestion"] / (d_t * _log2sq(v["n"]))
            )
        if "agg_rounds" in v and "quality" in v:
            denom = v["block"] * d_t + v["congestion"] + math.log2(max(2, v["n"]))
            ratios["rounds_alpha"].append(v["agg_rounds"] / denom)
    if not any(ratios.values()) and not extra:
        raise ValueError("empty corpus; nothing to calibrate")
    out: dict = {}
    for k, vals in ratios.items():
        if vals:
            out[k] = round(max(vals) * HEADROOM, 6)
    for k, v in (extra or {}).items():
        out[k] = round(v * HEADROOM, 6)
    return out


def save_constants(constants: dict, path: str | Path) -> None:
    text = json.dumps(constants, sort_keys=True, indent=2) + "\n"
    Path(path).write_text(text)


def load_constants(path: str | Path) -> dict:
    return json.loads(Path(path).read_text())


def check_regressions(fresh: dict, stored: dict) -> list[str]:
    """A fresh max ratio exceeding a stored constant means the stored 25%
    headroom has been eaten: flag it."""
    flags = []
    for k, v in fresh.items():
        if k in stored and v / HEADROOM > stored[k]:
            flags.append(f"{k}: fresh max {v / HEADROOM:.4f} exceeds stored bound {stored[k]:.4f}")
    return flags


def compression_depth_ratios(seed: int = 0) -> list[float]:
    """Compressed depth over ceil(log2 bags)^2 on chains and caterpillars."""
    import random as _random

    from .decomposition import compress_cliquesum
    from .families import _cliquesum_build

    out = []
    for bags in (64, 256, 1024):
        for shape in ("chain", "caterpillar"):
            _g, cst = _cliquesum_build(bags, 2, _random.Random(seed), shape)
            depth = compress_cliquesum(cst).depth()
            out.append(depth / math.ceil(math.log2(bags)) ** 2)
    return out


def oracle_quality_ratios(seed: int = 0, count: int = 40) -> list[float]:
    """Constructed quality over the exhaustive optimum on tiny instances."""
    import random as _random

    from .construct import auto_shortcut
    from .shortcuts import brute_force_optimal

    rng = _random.Random(seed)
    out: list[float] = []
    tries = 0
    while len(out) < count and tries < 50 * count:
        tries += 1
        n = rng.randint(3, 9)
        edges = {(rng.randrange(i), i) for i in range(1, n)}
        for _ in range(n // 2):
            a, b = rng.randrange(n), rng.randrange(n)
            if a != b:
                edges.add((min(a, b), max(a, b)))
        from .graph import AnnotatedGraph

        g = AnnotatedGraph.build(n, [(u, v, 1) for u, v in edges])
        t = bfs_tree(g, 0)
        nparts = rng.randint(1, 2)
        if len(t.edges_sorted()) * nparts > 24:
            continue
        seeds = rng.sample(range(n), nparts)
        owner = {s: i for i, s in enumerate(seeds)}
        frontier = list(seeds)
        while frontier:
            v = frontier.pop(0)
            for u, _e in g.adjacency[v]:
                if u not in owner and rng.random() < 0.7:
                    owner[u] = owner[v]
                    frontier.append(u)
        groups: dict[int, set[int]] = {}
        for v, i in owner.items():
            groups.setdefault(i, set()).add(v)
        parts = Partition.of([groups[i] for i in sorted(groups)])
        sc = auto_shortcut(g, t, parts)
        d = max(1, t.diameter)
        got = quality(g, parts, sc, d).quality
        _osc, orep = brute_force_optimal(g, parts, t, d=d)
        if orep.quality > 0:
            out.append(got / orep.quality)
    return out


def calibrate_full(seed: int = 0) -> dict:
    """Fit every acceptance constant from the standing corpus."""
    rows = run_experiment(default_corpus(seed), timing=False)
    extra = {
        "depth_per_log2sq": max(compression_depth_ratios(seed)),
        "oracle_ratio": max(oracle_quality_ratios(seed)),
    }
    return fit_constants(rows, extra=extra)
