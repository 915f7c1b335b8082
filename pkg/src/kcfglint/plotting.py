"""Figures for scan and evaluation results."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .evaluation import EvalReport  # noqa: E402


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    # fixed metadata keeps the file stable across runs
    fig.savefig(path, dpi=100, bbox_inches="tight", metadata={"Software": None})
    plt.close(fig)
    return path


def plot_category_counts(counts: Mapping[str, int], path) -> Path:
    """Horizontal bar chart of diagnostics per category."""
    labels = list(counts)
    values = [counts[k] for k in labels]
    fig, ax = plt.subplots(figsize=(7, 0.4 * max(len(labels), 1) + 1.2))
    ax.barh(labels, values, color="#4c72b0")
    ax.invert_yaxis()
    ax.set_xlabel("diagnostics")
    ax.set_title(f"{sum(values)} diagnostics by category")
    for y, v in enumerate(values):
        ax.text(v, y, f" {v}", va="center")
    return _save(fig, path)


def plot_precision_recall(report: EvalReport, path) -> Path:
    """Grouped bars of precision and recall per category; undefined ratios are left blank."""
    cats = [c.value for c in report.per_category]
    prec = [s.precision for s in report.per_category.values()]
    rec = [s.recall for s in report.per_category.values()]
    xs = range(len(cats))
    width = 0.38
    fig, ax = plt.subplots(figsize=(max(4, 1.3 * len(cats) + 1), 3.8))
    ax.bar([x - width / 2 for x in xs], [p or 0 for p in prec], width, label="precision", color="#4c72b0")
    ax.bar([x + width / 2 for x in xs], [r or 0 for r in rec], width, label="recall", color="#dd8452")
    for x, p, r in zip(xs, prec, rec):
        if p is None:
            ax.text(x - width / 2, 0.01, "n/a", ha="center", fontsize=7, rotation=90)
        if r is None:
            ax.text(x + width / 2, 0.01, "n/a", ha="center", fontsize=7, rotation=90)
    ax.set_xticks(list(xs))
    ax.set_xticklabels(cats, rotation=30, ha="right")
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("ratio")
    ax.legend(loc="lower center", bbox_to_anchor=(0.5, 1.0), ncol=2, frameon=False)
    return _save(fig, path)
