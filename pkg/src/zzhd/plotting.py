"""Headless SVG rendering of loss curves and barcodes.

Output must be reproducible byte for byte, so the SVG hash salt is pinned
and the date metadata is stripped.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "zzhd"

import matplotlib.pyplot as plt

from .zigzag import INF

DIM_COLORS = {0: "tab:blue", 1: "tab:red"}


def _save(fig, path: str) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_loss_series(src_ip: str, rows: list, spans: list, origin: int, path: str) -> None:
    """Reconstruction error over time for one source.

    rows: (epoch_seconds, mse_acc, mse_stats), spans: (start_epoch,
    end_epoch) intervals to shade.
    """
    fig, ax = plt.subplots(figsize=(8.0, 3.0))
    hours = [(t - origin) / 3600.0 for t, _, _ in rows]
    ax.plot(hours, [r[1] for r in rows], marker="o", color="tab:red",
            label="barcode features")
    ax.plot(hours, [r[2] for r in rows], marker="s", color="tab:blue",
            label="summary statistics")
    for start, end in spans:
        ax.axvspan((start - origin) / 3600.0, (end - origin) / 3600.0,
                   color="tab:orange", alpha=0.25, lw=0)
    ax.set_xlabel("hours since capture start")
    ax.set_ylabel("reconstruction MSE")
    ax.set_title(src_ip)
    ax.legend(loc="upper left", fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def plot_barcode(intervals_by_dim: dict, n_snapshots: int, src_ip: str, path: str) -> None:
    """Horizontal bars per interval, dimension 0 below dimension 1;
    right-open bars get an arrowhead at the last snapshot."""
    fig, ax = plt.subplots(figsize=(8.0, 3.0))
    top = float(n_snapshots - 1)
    y = 0
    ticks, tick_labels = [], []
    for dim in sorted(intervals_by_dim):
        start_y = y
        for birth, death in sorted(intervals_by_dim[dim]):
            right = top if death == INF else death
            ax.hlines(y, birth, right, color=DIM_COLORS.get(dim, "tab:gray"), lw=2)
            if death == INF:
                ax.plot([right], [y], marker=">", color=DIM_COLORS.get(dim, "tab:gray"),
                        markersize=5)
            y += 1
        if y > start_y:
            ticks.append((start_y + y - 1) / 2.0)
            tick_labels.append(f"H{dim}")
        y += 1
    ax.set_yticks(ticks)
    ax.set_yticklabels(tick_labels)
    ax.set_xlim(-0.25, top + 0.5)
    ax.set_ylim(-1, max(y, 2))
    ax.set_xlabel("snapshot index")
    ax.set_title(src_ip)
    fig.tight_layout()
    _save(fig, path)
