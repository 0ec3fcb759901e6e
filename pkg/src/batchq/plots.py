"""Figure rendering for the command-line report paths.

Every CLI command that writes a CSV can also render a matching PNG next to
it.  Figures are deliberately plain: one axes per quantity, labeled, saved
to file with a non-interactive backend.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_FIGSIZE = (6.4, 4.0)


def _new_axes(xlabel: str, ylabel: str):
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    return fig, ax


def _finish(fig, path) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_mgf_convergence(path, thetas, curves) -> None:
    """Plot scaled steady MGF curves; ``curves`` is a list of (label, values)
    with the limiting curve labeled 'inf' drawn dashed."""
    fig, ax = _new_axes("theta", "mgf")
    for label, values in curves:
        if label == "inf":
            ax.plot(thetas, values, "k--", label="limit")
        else:
            ax.plot(thetas, values, label=f"n = {label}")
    ax.legend()
    _finish(fig, path)


def save_density(path, values, bins: int = 80) -> None:
    fig, ax = _new_axes("value", "density")
    ax.hist(np.asarray(values), bins=bins, density=True, histtype="step")
    _finish(fig, path)


def save_moments(path, t, means, variances) -> None:
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6.4, 6.0), sharex=True)
    ax1.plot(t, means)
    ax1.set_ylabel("mean")
    ax1.grid(True, alpha=0.3)
    ax2.plot(t, variances)
    ax2.set_ylabel("variance")
    ax2.set_xlabel("t")
    ax2.grid(True, alpha=0.3)
    _finish(fig, path)


def save_mgf_grid(path, t_values, theta_values, table) -> None:
    """One curve per theta over the time grid; ``table[i][j]`` is the value at
    (theta i, time j)."""
    fig, ax = _new_axes("t", "mgf")
    for i, theta in enumerate(theta_values):
        ax.plot(t_values, table[i], label=f"theta = {theta:g}")
    ax.legend()
    _finish(fig, path)


def save_pmf(path, support, probs) -> None:
    fig, ax = _new_axes("j", "probability")
    ax.bar(support, probs, width=0.8)
    _finish(fig, path)


def save_curve(path, x, y, xlabel: str, ylabel: str) -> None:
    fig, ax = _new_axes(xlabel, ylabel)
    ax.plot(x, y)
    _finish(fig, path)


def save_sim_summary(path, times, means, ses, analytic=None) -> None:
    fig, ax = _new_axes("t", "queue length")
    ax.errorbar(times, means, yerr=2.0 * np.asarray(ses), fmt="o",
                capsize=3, label="simulated (±2 se)")
    if analytic is not None:
        ax.plot(times, analytic, "-", label="analytic")
    ax.legend()
    _finish(fig, path)


def save_phi(path, phi) -> None:
    fig, ax = _new_axes("sub-queue", "phi")
    ax.bar(np.arange(1, len(phi) + 1), phi, width=0.6)
    _finish(fig, path)
