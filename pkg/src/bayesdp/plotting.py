"""Figure rendering for traces, noise sweeps and order profiles.

Rendering always goes to files (Agg backend); the CSV outputs remain the
primary artifacts and figures are an optional view of the same data.
"""

from __future__ import annotations

import os
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .simulator import PrivacyTrace

__all__ = [
    "plot_traces",
    "plot_sigma_sweep",
    "plot_lambda_profiles",
    "plot_training",
]

_DP_STYLE = {"color": "tab:red", "linestyle": "--"}
_BDP_STYLE = {"color": "tab:blue", "linestyle": "-"}


def plot_traces(entries: Sequence[tuple[str, PrivacyTrace]], path: str | os.PathLike, title: str = "") -> None:
    """Epsilon over steps, one panel per run, both accountants per panel."""
    n = len(entries)
    fig, axes = plt.subplots(1, n, figsize=(4.2 * n, 3.4), squeeze=False, sharey=False)
    for ax, (label, trace) in zip(axes[0], entries):
        ax.plot(trace.step, trace.epsilon_dp, label="worst-case", **_DP_STYLE)
        ax.plot(trace.step, trace.epsilon_bdp, label="estimated", **_BDP_STYLE)
        ax.set_xlabel("step")
        ax.set_ylabel(r"$\varepsilon$")
        ax.set_title(label)
        ax.legend(fontsize=8)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_sigma_sweep(
    points: Sequence[tuple[float, float, float]],
    path: str | os.PathLike,
    title: str = "",
) -> None:
    """Final epsilon against the noise multiplier: (sigma, eps_dp, eps_bdp)."""
    sigmas = [p[0] for p in points]
    fig, ax = plt.subplots(figsize=(4.6, 3.4))
    ax.plot(sigmas, [p[1] for p in points], marker="o", label="worst-case", **_DP_STYLE)
    ax.plot(sigmas, [p[2] for p in points], marker="s", label="estimated", **_BDP_STYLE)
    ax.set_xlabel(r"$\sigma$")
    ax.set_ylabel(r"$\varepsilon$")
    ax.set_yscale("log")
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_lambda_profiles(
    profiles: Sequence[tuple[str, Sequence[int], Sequence[float]]],
    path: str | os.PathLike,
    title: str = "",
) -> None:
    """Epsilon against the moment order, one line per labelled profile."""
    fig, ax = plt.subplots(figsize=(4.6, 3.4))
    for label, grid, eps in profiles:
        ax.plot(grid, eps, marker=".", label=label)
    ax.set_xlabel(r"$\lambda$")
    ax.set_ylabel(r"$\varepsilon$")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_training(
    trace: PrivacyTrace,
    train_accuracy: Sequence[float],
    test_accuracy: Sequence[float],
    path: str | os.PathLike,
    title: str = "",
) -> None:
    """Two panels: epsilon evolution and per-epoch accuracy."""
    fig, (ax_eps, ax_acc) = plt.subplots(1, 2, figsize=(8.6, 3.4))
    ax_eps.plot(trace.step, trace.epsilon_dp, label="worst-case", **_DP_STYLE)
    ax_eps.plot(trace.step, trace.epsilon_bdp, label="estimated", **_BDP_STYLE)
    ax_eps.set_xlabel("step")
    ax_eps.set_ylabel(r"$\varepsilon$")
    ax_eps.legend(fontsize=8)
    epochs = range(1, len(train_accuracy) + 1)
    ax_acc.plot(epochs, train_accuracy, label="train", color="tab:green")
    ax_acc.plot(epochs, test_accuracy, label="test", color="tab:purple")
    ax_acc.set_xlabel("epoch")
    ax_acc.set_ylabel("accuracy")
    ax_acc.legend(fontsize=8)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
