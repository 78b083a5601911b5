"""Render convergence figures from harness output files.

One figure per summary: the per-strategy mean best-so-far curve with a
standard-error band, and a horizontal reference line at the true worst value
when the summary carries one.
"""

from __future__ import annotations

import csv
import json
import warnings
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

STRATEGY_STYLE = {
    "bo": ("tab:red", "surrogate search"),
    "rs": ("tab:blue", "random search"),
    "es": ("tab:green", "exhaustive search"),
}

METRIC_AXIS = {
    "accuracy": "accuracy of worst subgroup found",
    "mse": "mse of worst subgroup found",
    "precision": "precision of worst subgroup found",
    "recall": "recall of worst subgroup found",
}


def _per_trial_curves(trace_path: Path) -> dict[str, dict[int, list[float]]]:
    curves: dict[str, dict[int, list[float]]] = {}
    with open(trace_path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            per = curves.setdefault(row["method"], {})
            per.setdefault(int(row["trial"]), []).append(
                float(row["best_so_far_raw"])
            )
    return curves


def plot_convergence(
    summary_path: Path,
    out_dir: Path,
    *,
    stem: str = "convergence",
    title: str | None = None,
    trace_path: Path | None = None,
    formats: tuple[str, ...] = ("png", "svg"),
) -> list[Path]:
    """Write the convergence figure in every requested format."""
    summary = json.loads(Path(summary_path).read_text(encoding="utf-8"))
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for name, section in summary["strategies"].items():
        mean = np.asarray(section["mean"], dtype=float)
        if mean.size == 0:
            continue
        stderr = np.asarray(section["stderr"], dtype=float)
        color, label = STRATEGY_STYLE.get(name, (None, name))
        iterations = np.arange(1, mean.size + 1)
        ax.plot(iterations, mean, color=color, label=label, linewidth=1.8)
        ax.fill_between(
            iterations, mean - stderr, mean + stderr, color=color, alpha=0.2
        )

    if trace_path is not None:
        for name, per_trial in _per_trial_curves(Path(trace_path)).items():
            color, _ = STRATEGY_STYLE.get(name, (None, name))
            for values in per_trial.values():
                ax.plot(
                    np.arange(1, len(values) + 1),
                    values,
                    color=color,
                    alpha=0.12,
                    linewidth=0.6,
                )

    true_worst = summary.get("true_worst")
    if true_worst is not None:
        ax.axhline(
            true_worst["raw_value"],
            color="black",
            linewidth=1.4,
            label="true worst",
        )
    else:
        warnings.warn("summary has no true_worst; plotting without reference line")

    ax.set_xlabel("iterations")
    kind = summary.get("metric", {}).get("kind", "")
    ax.set_ylabel(METRIC_AXIS.get(kind, "best-so-far metric"))
    if title:
        ax.set_title(title)
    ax.legend(frameon=False)
    fig.tight_layout()

    written = []
    for fmt in formats:
        path = out_dir / f"{stem}.{fmt}"
        fig.savefig(path, dpi=150)
        written.append(path)
    plt.close(fig)
    return written
