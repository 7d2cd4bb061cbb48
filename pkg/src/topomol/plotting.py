"""Report figures rendered to files next to the delimited outputs.

All rendering uses the Agg backend so commands work headless; every
function writes a PNG and returns the path.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .topology import PersistenceImage  # noqa: E402

__all__ = [
    "plot_training_curve",
    "plot_eval_summary",
    "plot_persistence_image",
]

_FIGSIZE = (7.2, 4.45)  # golden-ratio-ish default


def plot_training_curve(records: list[dict], path: str | Path) -> Path:
    """Best penalized logP and epsilon per episode from the training log."""
    path = Path(path)
    episodes = [r["episode"] for r in records]
    best = [r["best_penalized_logp"] for r in records]
    eps = [r["epsilon"] for r in records]
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.plot(episodes, best, color="tab:blue", lw=1.2, label="best penalized logP")
    ax.set_xlabel("episode")
    ax.set_ylabel("best penalized logP", color="tab:blue")
    ax2 = ax.twinx()
    ax2.plot(episodes, eps, color="tab:orange", lw=1.0, ls="--", label="epsilon")
    ax2.set_ylabel("epsilon", color="tab:orange")
    ax2.set_ylim(0, 1.05)
    ax.set_title("Training progress")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_eval_summary(
    improvements: dict[str, list[float]], path: str | Path
) -> Path:
    """Distribution of per-episode property improvement for each policy."""
    path = Path(path)
    names = list(improvements)
    data = [improvements[k] for k in names]
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.axhline(0.0, color="0.6", lw=0.8)
    ax.boxplot(data, tick_labels=names, showmeans=True)
    for k, vals in enumerate(data, start=1):
        jitter = (np.arange(len(vals)) / max(len(vals) - 1, 1) - 0.5) * 0.25
        ax.plot(k + jitter, vals, ".", color="tab:blue", alpha=0.45, ms=4)
    ax.set_ylabel("penalized logP improvement over start")
    ax.set_title("Per-policy improvement distribution")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_persistence_image(
    image: PersistenceImage, smiles: str, path: str | Path
) -> Path:
    """Side-by-side H0/H1 heatmaps of one molecule's persistence image."""
    path = Path(path)
    rows, cols = image.resolution
    half = rows * cols
    fig, axes = plt.subplots(1, 2, figsize=_FIGSIZE)
    for ax, (lo, hi), label in (
        (axes[0], (0, half), "H0"),
        (axes[1], (half, 2 * half), "H1"),
    ):
        grid = image.values[lo:hi].reshape(rows, cols)
        im = ax.imshow(grid, origin="lower", cmap="viridis", aspect="auto")
        ax.set_title(label)
        ax.set_xlabel("birth bin")
        ax.set_ylabel("persistence bin")
        fig.colorbar(im, ax=ax, fraction=0.046)
    fig.suptitle(f"Persistence image: {smiles}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
