"""Figure rendering for benchmark output.

Renders the metric scaling plots next to the delimited output: block and
congestion against the spanning-tree diameter (log-log with fitted slopes),
and simulated rounds against the quality bound.  Uses the non-interactive
Agg backend so runs are headless-safe.
"""
from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .harness import ExperimentRow


def _ok_rows(rows: Sequence[ExperimentRow]) -> list[dict]:
    return [r.values for r in rows if r.values.get("status") == "ok"]


def fit_exponent(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Slope of the least-squares line through (log x, log y)."""
    pts = [(x, y) for x, y in zip(xs, ys) if x > 0 and y > 0]
    if len(pts) < 2:
        return 0.0
    lx = np.log([p[0] for p in pts])
    ly = np.log([p[1] for p in pts])
    if np.allclose(lx, lx[0]):
        return 0.0
    slope, _icept = np.polyfit(lx, ly, 1)
    return float(slope)


def _scatter_fit(ax, xs, ys, xlabel, ylabel):
    ax.scatter(xs, ys, s=18, alpha=0.7)
    expo = fit_exponent(xs, ys)
    if xs and min(xs) > 0:
        grid = np.linspace(min(xs), max(xs), 50)
        pts = [(x, y) for x, y in zip(xs, ys) if x > 0 and y > 0]
        if len(pts) >= 2:
            lx = np.log([p[0] for p in pts])
            ly = np.log([p[1] for p in pts])
            slope, icept = np.polyfit(lx, ly, 1)
            ax.plot(grid, np.exp(icept) * grid ** slope, "r--", lw=1,
                    label=f"fit exponent {slope:.2f}")
            ax.legend(fontsize=8)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_xscale("log")
    ax.set_yscale("log")
    return expo


def render_figures(rows: Sequence[ExperimentRow], out_dir: str | Path) -> list[Path]:
    """Write the standard benchmark figures; returns the created paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    data = _ok_rows(rows)
    created: list[Path] = []

    with_metrics = [v for v in data if v.get("block") is not None and v.get("d_T")]
    fig, axes = plt.subplots(1, 2, figsize=(9, 4))
    xs = [v["d_T"] for v in with_metrics]
    _scatter_fit(axes[0], xs, [max(1, v["block"]) for v in with_metrics], "tree diameter", "block")
    xs2 = [v["d_T"] * max(1.0, math.log2(max(2, v["n"]))) ** 2 for v in with_metrics]
    _scatter_fit(axes[1], xs2, [max(1, v["congestion"]) for v in with_metrics],
                 "d_T * log^2 n", "congestion")
    fig.suptitle("shortcut metrics vs tree diameter")
    fig.tight_layout()
    p = out / "metrics_scaling.png"
    fig.savefig(p, dpi=120)
    plt.close(fig)
    created.append(p)

    with_rounds = [v for v in data if v.get("agg_rounds") is not None]
    fig, ax = plt.subplots(figsize=(5, 4))
    qs = [max(1, v["quality"]) for v in with_rounds]
    rs = [max(1, v["agg_rounds"]) for v in with_rounds]
    _scatter_fit(ax, qs, rs, "quality b*d+c", "aggregation rounds")
    fig.suptitle("simulated rounds vs quality")
    fig.tight_layout()
    p = out / "rounds_vs_quality.png"
    fig.savefig(p, dpi=120)
    plt.close(fig)
    created.append(p)

    with_mst = [v for v in data if v.get("mst_rounds") is not None]
    if with_mst:
        fig, ax = plt.subplots(figsize=(6, 4))
        fams = sorted({v["family"] for v in with_mst})
        for fam in fams:
            pts = [(v["n"], v["mst_rounds"]) for v in with_mst if v["family"] == fam]
            pts.sort()
            ax.plot([p0 for p0, _ in pts], [p1 for _, p1 in pts], "o-", ms=4, label=fam)
        ax.set_xlabel("n")
        ax.set_ylabel("MST rounds")
        ax.set_xscale("log")
        ax.legend(fontsize=8)
        fig.suptitle("MST round counts by family")
        fig.tight_layout()
        p = out / "mst_rounds.png"
        fig.savefig(p, dpi=120)
        plt.close(fig)
        created.append(p)
    return created
