"""Static SVG figures: line plots and heatmaps."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# Text as paths keeps the SVG self-contained; no date keeps it reproducible.
matplotlib.rcParams["svg.fonttype"] = "path"
matplotlib.rcParams["svg.hashsalt"] = "emx"
_META = {"Date": None}


def line_plot(x, series: dict[str, np.ndarray], path: str | Path, xlabel: str = "", ylabel: str = "",
              logx: bool = False, logy: bool = False, title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, y in series.items():
        ax.plot(x, y, label=label, lw=1.2)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    if title:
        ax.set_title(title)
    if len(series) > 1:
        ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=_META)
    plt.close(fig)
    return Path(path)


def heatmap(x, y, z, path: str | Path, xlabel: str = "", ylabel: str = "", zlabel: str = "",
            logx: bool = False, logy: bool = False) -> Path:
    """``z`` has shape ``(len(x), len(y))``."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    mesh = ax.pcolormesh(x, y, np.asarray(z).T, shading="auto")
    fig.colorbar(mesh, ax=ax, label=zlabel)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=_META)
    plt.close(fig)
    return Path(path)
