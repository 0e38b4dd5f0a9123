"""Figures written next to the CSV reports."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be chosen first)
import numpy as np  # noqa: E402

from .telemetry import Category, RunStats  # noqa: E402
from .theory import DECAY, size_recursion  # noqa: E402

CATEGORY_COLORS = {
    Category.COMPLEMENT: "#c44e52",
    Category.REVISIT: "#dd8452",
    Category.OTHER: "#4c72b0",
}

RC = {
    "font.size": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
}


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_query_categories(stats: Mapping[str, RunStats], path: str | Path) -> Path:
    """Stacked query counts per algorithm, annotated successes/total (rate)."""
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(1.2 + 1.1 * len(stats), 3.2))
        names = list(stats)
        x = np.arange(len(names))
        bottom = np.zeros(len(names))
        for cat in Category:
            heights = np.array([stats[n][cat].total for n in names], dtype=float)
            ax.bar(x, heights, 0.6, bottom=bottom, color=CATEGORY_COLORS[cat], label=cat.value)
            for i, n in enumerate(names):
                s = stats[n][cat]
                if s.total:
                    ax.text(
                        x[i],
                        bottom[i] + heights[i] / 2,
                        f"{s.successes}/{s.total}\n({100 * s.success_rate:.1f}%)",
                        ha="center",
                        va="center",
                        fontsize=6,
                        color="white",
                    )
            bottom += heights
        ax.set_xticks(x, names)
        ax.set_ylabel("queries")
        ax.legend(frameon=False, fontsize=7)
        return _save(fig, path)


def plot_query_counts(rows: Sequence[dict], algorithms: Sequence[str], path: str | Path) -> Path:
    """Geometric-mean query number per benchmark, one bar per algorithm."""
    benches = list(dict.fromkeys(r["benchmark"] for r in rows))
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(max(4.0, 0.35 * len(benches) * len(algorithms)), 3.2))
        width = 0.8 / max(1, len(algorithms))
        x = np.arange(len(benches))
        for j, alg in enumerate(algorithms):
            ys = []
            for b in benches:
                row = next(r for r in rows if r["benchmark"] == b and r["algorithm"] == alg)
                ys.append(row["queries_gm"] if row["status"] == "ok" else 0.0)
            ax.bar(x + (j - (len(algorithms) - 1) / 2) * width, ys, width, label=alg)
        ax.set_xticks(x, benches, rotation=60, ha="right", fontsize=6)
        ax.set_ylabel("queries (geometric mean)")
        ax.set_yscale("log")
        ax.legend(frameon=False, fontsize=7)
        return _save(fig, path)


def plot_bounds(path: str | Path, s_max: float = 1e5, points: int = 400) -> Path:
    """Next-round size against the current size with its linear bounds."""
    s = np.unique(np.geomspace(2.0, s_max, points))
    value = np.array([size_recursion(v) for v in s])
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(3.4, 2.8))
        ax.plot(s, DECAY * s, "--", lw=0.8, label="upper (1-1/e)s")
        ax.plot(s, value, lw=1.2, label="next size")
        ax.plot(s, DECAY * s - 1, ":", lw=0.8, label="lower (1-1/e)s-1")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("size in round r")
        ax.set_ylabel("size in round r+1")
        ax.legend(frameon=False, fontsize=7)
        return _save(fig, path)
