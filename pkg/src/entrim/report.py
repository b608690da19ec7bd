"""CSV/JSON emission and matplotlib figure rendering for experiment outputs.

CSV files are the primary machine-readable contract: fixed column order,
floats at 9 significant digits, empty fields for undefined values.  Figures
are rendered next to them as PNGs for quick inspection.  Both are
byte-deterministic for a fixed config and seed.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

CURVES_CSV = "curves.csv"
SUMMARY_JSON = "summary.json"
SWEEP_CSV = "sweep.csv"
QUARTILES_CSV = "quartiles.csv"
OUTLIERS_CSV = "outliers.csv"
MEANS_CSV = "means.csv"


def fmt(value) -> str:
    """One CSV cell: 9 significant digits for floats, empty for None."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.9g}"


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def write_summary(path: Path, summary: dict) -> None:
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_curves_csv(path: Path, labels: list[str], curves: dict[str, np.ndarray]) -> None:
    """curves.csv: iteration (1-based) plus one misalignment-dB column per
    algorithm label, in config order."""
    n = len(next(iter(curves.values())))
    header = ["iteration"] + labels
    rows = ([i + 1] + [curves[label][i] for label in labels] for i in range(n))
    write_csv(path, header, rows)


def write_sweep_csv(path: Path, rows) -> None:
    """sweep.csv rows: (mu, sigma, algorithm, steady_state_db,
    convergence_iteration, diverged)."""
    header = ["mu", "sigma", "algorithm", "steady_state_db", "convergence_iteration", "diverged"]
    out = []
    for mu, sigma, label, point in rows:
        steady = None if np.isnan(point.steady_state_db) else point.steady_state_db
        out.append([mu, sigma, label, steady, point.convergence_iteration, point.diverged])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for mu, sigma, label, steady, conv, diverged in out:
            writer.writerow([fmt(mu), fmt(sigma), label, fmt(steady), fmt(conv), fmt(diverged)])


def write_quartile_demo_csvs(out_dir: Path, records) -> None:
    write_csv(
        out_dir / QUARTILES_CSV,
        [
            "step",
            "q1_tracked",
            "q3_tracked",
            "q1_exact",
            "q3_exact",
            "lower_extreme",
            "upper_extreme",
            "recalibrated",
        ],
        (
            [
                r.step,
                r.q1_tracked,
                r.q3_tracked,
                r.q1_exact,
                r.q3_exact,
                r.lower_extreme,
                r.upper_extreme,
                r.recalibrated,
            ]
            for r in records
        ),
    )
    write_csv(
        out_dir / OUTLIERS_CSV,
        ["step", "value", "flagged"],
        ([r.step, r.value, r.flagged] for r in records),
    )
    write_csv(
        out_dir / MEANS_CSV,
        ["step", "plain_mean", "trimmed_mean"],
        ([r.step, r.plain_mean, r.trimmed_mean] for r in records),
    )


# -- figures ---------------------------------------------------------------


def _save(fig, path: Path) -> None:
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def save_learning_curves(path: Path, labels: list[str], curves: dict[str, np.ndarray]) -> None:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for label in labels:
        ax.plot(np.arange(1, len(curves[label]) + 1), curves[label], label=label, linewidth=1.0)
    ax.set_xlabel("iteration")
    ax.set_ylabel("misalignment (dB)")
    ax.grid(True, alpha=0.3)
    ax.legend()
    _save(fig, path)


def save_sweep_scatter(path: Path, rows) -> None:
    """Convergence iteration vs steady-state misalignment, one marker set
    per algorithm (raw grid points, no hull)."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    by_label: dict[str, list] = {}
    for mu, sigma, label, point in rows:
        if point.convergence_iteration is not None and not np.isnan(point.steady_state_db):
            by_label.setdefault(label, []).append(
                (point.convergence_iteration, point.steady_state_db)
            )
    for label, pts in by_label.items():
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        ax.scatter(xs, ys, s=14, label=label, alpha=0.75)
    ax.set_xlabel("convergence iteration")
    ax.set_ylabel("steady-state misalignment (dB)")
    ax.grid(True, alpha=0.3)
    ax.legend()
    _save(fig, path)


def save_quartile_traces(path: Path, records) -> None:
    steps = [r.step for r in records]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for attr, style, label in (
        ("q1_tracked", "-", "Q1 tracked"),
        ("q1_exact", "--", "Q1 exact"),
        ("q3_tracked", "-", "Q3 tracked"),
        ("q3_exact", "--", "Q3 exact"),
    ):
        ax.plot(steps, [getattr(r, attr) for r in records], style, label=label, linewidth=1.0)
    ax.set_xlabel("step")
    ax.set_ylabel("quartile value")
    ax.grid(True, alpha=0.3)
    ax.legend()
    _save(fig, path)


def save_outlier_scatter(path: Path, records) -> None:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    kept = [(r.step, r.value) for r in records if not r.flagged]
    flagged = [(r.step, r.value) for r in records if r.flagged]
    if kept:
        ax.scatter([p[0] for p in kept], [p[1] for p in kept], s=4, label="kept", alpha=0.5)
    if flagged:
        ax.scatter(
            [p[0] for p in flagged],
            [p[1] for p in flagged],
            s=6,
            color="red",
            label="flagged",
            alpha=0.6,
        )
    ax.set_xlabel("step")
    ax.set_ylabel("value")
    ax.grid(True, alpha=0.3)
    ax.legend()
    _save(fig, path)


def save_running_means(path: Path, records) -> None:
    steps = [r.step for r in records]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(steps, [r.plain_mean for r in records], label="plain mean", linewidth=1.0)
    ax.plot(steps, [r.trimmed_mean for r in records], label="trimmed mean", linewidth=1.0)
    ax.axhline(0.0, color="k", linewidth=0.6, alpha=0.5)
    ax.set_xlabel("step")
    ax.set_ylabel("running mean")
    ax.grid(True, alpha=0.3)
    ax.legend()
    _save(fig, path)


def save_value_histogram(path: Path, values, title: str) -> None:
    """Histogram with 100 equal-width bins over [min, max] of the sample."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.hist(np.asarray(values, dtype=float), bins=100)
    ax.set_xlabel("value")
    ax.set_ylabel("count")
    ax.set_title(title)
    _save(fig, path)
