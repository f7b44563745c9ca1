"""Figure rendering for evaluation outputs.

Reads the delimited side tables written next to report.json and renders
them as image files: the five-score radar chart, the reporting-lag
histogram, the per-zone coverage bars, and the seasonal score grid.
Rendering is read-only with respect to the data files.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .errors import DataError


def _read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def render_radar(out_dir) -> Path:
    rows = _read_csv(Path(out_dir) / "radar.csv")
    if not rows:
        raise DataError("radar.csv has no scores", path=str(Path(out_dir) / "radar.csv"))
    labels = [r["dimension"] for r in rows]
    values = [float(r["score"]) for r in rows]
    angles = np.linspace(0, 2 * math.pi, len(labels), endpoint=False).tolist()
    values_c = values + values[:1]
    angles_c = angles + angles[:1]
    fig, ax = plt.subplots(figsize=(5, 5), subplot_kw={"projection": "polar"})
    ax.plot(angles_c, values_c, linewidth=1.5)
    ax.fill(angles_c, values_c, alpha=0.25)
    ax.set_xticks(angles)
    ax.set_xticklabels(labels)
    ax.set_ylim(0, 1)
    ax.set_title("Evaluation scores")
    target = Path(out_dir) / "radar.png"
    fig.savefig(target, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return target


def render_lag_histogram(out_dir) -> Path:
    rows = _read_csv(Path(out_dir) / "time_lags.csv")
    lags = [int(r["lag_days"]) for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    if lags:
        lo, hi = min(lags), max(lags)
        bins = np.arange(lo - 0.5, hi + 1.5, 1.0) if hi - lo <= 60 else 30
        ax.hist(lags, bins=bins, edgecolor="black", linewidth=0.5)
    ax.axvline(0, color="red", linewidth=1)
    ax.set_xlabel("candidate lag behind reference (days)")
    ax.set_ylabel("matched pairs")
    ax.set_title("Reporting lags")
    target = Path(out_dir) / "time_lags.png"
    fig.savefig(target, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return target


def render_per_zone(out_dir) -> Path:
    rows = _read_csv(Path(out_dir) / "per_zone_representativeness.csv")
    # average each zone over the evaluated scale pairs
    totals: dict = {}
    for r in rows:
        totals.setdefault(r["zone"], []).append(float(r["score"]))
    zones = sorted(totals)
    means = [sum(totals[z]) / len(totals[z]) for z in zones]
    fig, ax = plt.subplots(figsize=(max(4, 0.6 * len(zones) + 2), 4))
    ax.bar(range(len(zones)), means)
    ax.set_xticks(range(len(zones)))
    ax.set_xticklabels(zones, rotation=45, ha="right")
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("coverage score")
    ax.set_title("Per-zone representativeness")
    target = Path(out_dir) / "per_zone_representativeness.png"
    fig.savefig(target, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return target


def render_seasonal_grid(out_dir) -> Path:
    rows = _read_csv(Path(out_dir) / "seasonal_grid.csv")
    cells = [r for r in rows if r["score"]]
    seasons = sorted({r["season"] for r in cells})
    settings = sorted({(r["spatial_scale"], r["temporal_scale"], r["iota"], r["rho"]) for r in cells})
    grid = np.full((len(settings), len(seasons)), np.nan)
    for r in cells:
        i = settings.index((r["spatial_scale"], r["temporal_scale"], r["iota"], r["rho"]))
        j = seasons.index(r["season"])
        grid[i, j] = float(r["score"])
    fig, ax = plt.subplots(figsize=(max(4, 0.6 * len(seasons) + 2), max(3, 0.5 * len(settings) + 2)))
    if cells:
        im = ax.imshow(grid, vmin=0, vmax=1, cmap="viridis", aspect="auto")
        fig.colorbar(im, ax=ax, label="seasonal score")
    ax.set_xticks(range(len(seasons)))
    ax.set_xticklabels(seasons, rotation=45, ha="right")
    ax.set_yticks(range(len(settings)))
    ax.set_yticklabels(["/".join(s) for s in settings])
    ax.set_title("Seasonal pattern recovery")
    target = Path(out_dir) / "seasonal_grid.png"
    fig.savefig(target, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return target


def render_all(out_dir) -> list:
    """Render every figure whose backing table exists; returns paths."""
    out_dir = Path(out_dir)
    produced = []
    jobs = (
        ("radar.csv", render_radar),
        ("time_lags.csv", render_lag_histogram),
        ("per_zone_representativeness.csv", render_per_zone),
        ("seasonal_grid.csv", render_seasonal_grid),
    )
    for table, renderer in jobs:
        if (out_dir / table).exists():
            produced.append(renderer(out_dir))
    return produced
