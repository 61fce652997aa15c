"""Figure rendering for curves, trajectories, and diffusion paths.

Figures are written straight to files (Agg backend); the CLI exposes them
through optional ``--plot`` flags next to the delimited output.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_weight_curves(curves, path, title=None):
    """Log-log plot of one or more (label, ranks, weights) curves."""
    fig, ax = plt.subplots(figsize=(8, 5))
    for label, ranks, weights in curves:
        style = "o" if label.startswith("observed") else "-"
        ax.loglog(ranks, weights, style, markersize=3, label=label or None)
    ax.set_xlabel("rank")
    ax.set_ylabel("weight")
    if title:
        ax.set_title(title)
    if any(label for label, _, _ in curves):
        ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_trajectory(times, series, path, title=None):
    """Top-k weight paths of a down-up chain run."""
    fig, ax = plt.subplots(figsize=(8, 5))
    for i in range(series.shape[1]):
        ax.plot(times, series[:, i], lw=0.8, label=f"x{i + 1}")
    ax.set_xlabel("step")
    ax.set_ylabel("weight")
    if title:
        ax.set_title(title)
    ax.legend(ncol=2, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_price_paths(paths, path, title=None):
    """Weights, market value, and prices from a diffusion run, stacked."""
    fig, axes = plt.subplots(3, 1, figsize=(8, 9), sharex=True)
    k = paths.weights.shape[1]
    show = min(k, 10)
    for i in range(show):
        axes[0].plot(paths.times, paths.weights[:, i], lw=0.7)
        axes[2].plot(paths.times, paths.prices[:, i], lw=0.7)
    axes[1].plot(paths.times, paths.market, lw=0.9, color="black")
    axes[0].set_ylabel("weights")
    axes[1].set_ylabel("market value")
    axes[2].set_ylabel("prices")
    axes[2].set_xlabel("t")
    if title:
        axes[0].set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_ranked_weights(weights, path, title=None):
    """Log-log plot of one ranked weight vector."""
    ranks = np.arange(1, len(weights) + 1)
    return save_weight_curves([("", ranks, np.asarray(weights))], path, title)
