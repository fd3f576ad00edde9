"""Matplotlib figures written next to the evaluation CSV."""
from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .evalkit import EvalRow  # noqa: E402

METRICS = ("precision", "recall", "f1", "nmi", "anmi")
LABELS = ("Precision", "Recall", "F$_1$", "NMI", "aNMI")


def plot_report(rows: Sequence[EvalRow], path, dpi: int = 120) -> None:
    """Grouped bar chart: one group per heuristic, one bar per metric."""
    names = [r.heuristic for r in rows]
    x = np.arange(len(rows))
    width = 0.8 / len(METRICS)
    fig, ax = plt.subplots(figsize=(max(6.0, 1.1 * len(rows) + 2), 4.0))
    for i, (m, lab) in enumerate(zip(METRICS, LABELS)):
        vals = [getattr(r, m) for r in rows]
        ax.bar(x + (i - (len(METRICS) - 1) / 2) * width, vals, width, label=lab)
    ax.set_xticks(x)
    ax.set_xticklabels(names, rotation=30 if len(rows) > 6 else 0, ha="right" if len(rows) > 6 else "center")
    lo = min(0.0, min((getattr(r, m) for r in rows for m in METRICS), default=0.0))
    ax.set_ylim(lo, 1.05)
    ax.axhline(0, color="black", linewidth=0.6)
    ax.set_ylabel("score")
    ax.legend(ncol=len(METRICS), fontsize=8, loc="upper center", bbox_to_anchor=(0.5, 1.12), frameon=False)
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)
    fig.tight_layout()
    fig.savefig(path, dpi=dpi, metadata={"Software": None})
    plt.close(fig)


def plot_dendrogram_levels(summary: Sequence[dict], path, dpi: int = 120) -> None:
    """Community count (log scale) and modularity per Louvain level."""
    levels = [s["level"] for s in summary]
    fig, ax1 = plt.subplots(figsize=(5.0, 3.2))
    ax1.plot(levels, [s["communities"] for s in summary], "o-", color="#1f77b4")
    ax1.set_yscale("log")
    ax1.set_xlabel("level")
    ax1.set_ylabel("communities", color="#1f77b4")
    ax1.set_xticks(levels)
    ax2 = ax1.twinx()
    ax2.plot(levels, [s["modularity"] for s in summary], "s--", color="#d62728")
    ax2.set_ylabel("modularity", color="#d62728")
    fig.tight_layout()
    fig.savefig(path, dpi=dpi, metadata={"Software": None})
    plt.close(fig)
