"""Figures for benchmark tables and throughput sweeps, rendered to files."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .metrics import MetricReport  # noqa: E402

STYLE = {
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
    # fixed metadata keeps repeated renders byte-identical
    "svg.hashsalt": "prodchain",
}


def _save(fig, out: str | Path) -> Path:
    out = Path(out)
    metadata = {"Software": None} if out.suffix.lower() == ".png" else {"Date": None}
    fig.savefig(out, metadata=metadata, bbox_inches="tight")
    plt.close(fig)
    return out


def plot_curve(
    points: Sequence[tuple[float, float]],
    out: str | Path,
    xlabel: str,
    ylabel: str = "Throughput (tps)",
    title: str | None = None,
) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5, 3.2))
        xs, ys = zip(*points)
        ax.plot(xs, ys, marker="o", lw=1.5)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        ax.set_ylim(bottom=0)
        if title:
            ax.set_title(title)
        return _save(fig, out)


def plot_blocksize(points: Sequence[tuple[int, float]], out: str | Path) -> Path:
    return plot_curve(points, out, "Transactions per block", title="TPS vs block size")


def plot_endorsers(points: Sequence[tuple[int, float]], out: str | Path) -> Path:
    return plot_curve(points, out, "Endorsers", title="TPS vs number of endorsers")


def plot_latency_table(
    reports: Sequence[MetricReport],
    out: str | Path,
    reference: dict[str, Sequence[float]] | None = None,
) -> Path:
    """Read and transaction latency against block count, with optional reference series."""
    xs = [r.group_value for r in reports]
    with plt.rc_context(STYLE):
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.2))
        ax1.plot(xs, [r.read_latency_s for r in reports], marker="o", label="simulated")
        ax2.plot(xs, [r.tx_latency_s for r in reports], marker="o", label="simulated")
        if reference:
            ax1.plot(xs, reference["read_latency_s"], ls="--", marker="x", label="testbed")
            ax2.plot(xs, reference["tx_latency_s"], ls="--", marker="x", label="testbed")
        ax1.set_ylabel("Read latency (s)")
        ax2.set_ylabel("Transaction latency (s)")
        for ax in (ax1, ax2):
            ax.set_xlabel("Prodblocks")
            ax.legend(frameon=False)
        return _save(fig, out)


def plot_success_table(
    reports: Sequence[MetricReport],
    out: str | Path,
    reference: Sequence[float] | None = None,
) -> Path:
    xs = [r.group_value for r in reports]
    with plt.rc_context(STYLE):
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.2))
        ax1.plot(xs, [r.success_rate_pct for r in reports], marker="o", label="simulated")
        if reference:
            ax1.plot(xs, reference, ls="--", marker="x", label="testbed")
        ax1.set_ylabel("Success rate (%)")
        ax1.legend(frameon=False)
        ax2.plot(xs, [r.block_throughput_bps for r in reports], marker="o")
        ax2.set_ylabel("Throughput (blocks/s)")
        for ax in (ax1, ax2):
            ax.set_xlabel("Prodblocks")
        return _save(fig, out)
