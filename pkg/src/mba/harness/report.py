"""Learning-curve reports: merged CSV tables plus rendered figures.

``write_report`` merges per-variant evaluation CSVs into one long table,
computes the top-5 summary per (variant, seed) and the cross-seed
aggregate per variant, and renders a success-vs-training-steps figure next
to the delimited output.
"""

from __future__ import annotations

import csv
import io
from collections import defaultdict
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .evaluate import read_eval_csv, top5_stats

LEARNING_CURVE_HEADER = ("variant", "seed", "checkpoint_step", "success_rate")
SUMMARY_HEADER = ("variant", "seed", "top5_mean", "top5_std")
AGGREGATE_HEADER = ("variant", "mean", "std", "n_seeds")

Row = tuple[str, int, int, float]  # variant, seed, checkpoint_step, success_rate


def merge_curves(named_csvs: Mapping[str, str | Path]) -> list[Row]:
    rows: list[Row] = []
    for variant in sorted(named_csvs):
        for seed, step, rate in read_eval_csv(named_csvs[variant]):
            rows.append((variant, seed, step, rate))
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    return rows


def summarize(rows: Sequence[Row]) -> tuple[list[tuple], list[tuple]]:
    """Per-(variant, seed) top-5 stats and per-variant cross-seed aggregates."""
    by_pair: dict[tuple[str, int], list[float]] = defaultdict(list)
    for variant, seed, _, rate in rows:
        by_pair[(variant, seed)].append(rate)
    summary = []
    by_variant: dict[str, list[float]] = defaultdict(list)
    for (variant, seed), rates in sorted(by_pair.items()):
        mean, std = top5_stats(rates)
        summary.append((variant, seed, mean, std))
        by_variant[variant].append(mean)
    aggregate = []
    for variant, means in sorted(by_variant.items()):
        arr = np.asarray(means)
        aggregate.append((variant, float(arr.mean()), float(arr.std()), len(means)))
    return summary, aggregate


def _csv_text(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(x) if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def render_learning_curves(rows: Sequence[Row], out_png: str | Path) -> None:
    """Success rate against training steps, per-variant mean with a std band."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    variants = sorted({r[0] for r in rows})
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    for idx, variant in enumerate(variants):
        color = colors[idx % len(colors)]
        per_seed: dict[int, dict[int, float]] = defaultdict(dict)
        for v, seed, step, rate in rows:
            if v == variant:
                per_seed[seed][step] = rate
        steps = sorted({step for curve in per_seed.values() for step in curve})
        for seed, curve in sorted(per_seed.items()):
            xs = sorted(curve)
            ax.plot(xs, [curve[x] for x in xs], color=color, alpha=0.25, linewidth=0.9)
        mean = np.array([np.mean([c[s] for c in per_seed.values() if s in c]) for s in steps])
        std = np.array([np.std([c[s] for c in per_seed.values() if s in c]) for s in steps])
        ax.plot(steps, mean, color=color, marker="o", markersize=3.5, label=variant)
        ax.fill_between(steps, mean - std, mean + std, color=color, alpha=0.15)
    ax.set_xlabel("training steps")
    ax.set_ylabel("success rate")
    ax.set_ylim(-0.02, 1.02)
    ax.grid(alpha=0.3)
    ax.legend(loc="lower right")
    fig.tight_layout()
    out_png = Path(out_png)
    tmp = out_png.with_name(out_png.name + ".tmp.png")
    fig.savefig(tmp, dpi=150)
    plt.close(fig)
    tmp.replace(out_png)


def write_report(named_csvs: Mapping[str, str | Path], out_dir: str | Path) -> dict[str, Path]:
    """Merge evaluation CSVs and emit curve table, summaries and the figure."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = merge_curves(named_csvs)
    summary, aggregate = summarize(rows)
    from ..numcore.checkpoint import _atomic_write_bytes

    paths = {
        "learning_curve": out_dir / "learning_curve.csv",
        "summary": out_dir / "summary.csv",
        "aggregate": out_dir / "aggregate.csv",
        "figure": out_dir / "learning_curve.png",
    }
    _atomic_write_bytes(paths["learning_curve"], _csv_text(LEARNING_CURVE_HEADER, rows).encode())
    _atomic_write_bytes(paths["summary"], _csv_text(SUMMARY_HEADER, summary).encode())
    _atomic_write_bytes(paths["aggregate"], _csv_text(AGGREGATE_HEADER, aggregate).encode())
    render_learning_curves(rows, paths["figure"])
    return paths
