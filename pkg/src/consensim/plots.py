"""Headless matplotlib rendering of trajectory logs (SVG files)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

__all__ = [
    "plot_positions_2d",
    "plot_positions_time",
    "plot_velocities",
    "plot_consensus_error",
    "render_run_figures",
]

plt.rcParams.update({
    "figure.figsize": (6.0, 4.5),
    "axes.grid": True,
    "grid.alpha": 0.3,
    "legend.fontsize": "small",
})


def _finish(fig, ax, path):
    ax.legend(loc="best", ncol=2)
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)
    return str(path)


def plot_positions_2d(log, path):
    """Planar agent trajectories with start/end markers and the final mean."""
    fig, ax = plt.subplots()
    for i in range(log.x.shape[1]):
        line, = ax.plot(log.x[:, i, 0], log.x[:, i, 1], lw=1.0,
                        label=f"agent {i + 1}")
        ax.plot(log.x[0, i, 0], log.x[0, i, 1], "o", ms=4,
                color=line.get_color())
        ax.plot(log.x[-1, i, 0], log.x[-1, i, 1], "x", ms=6,
                color=line.get_color())
    mean = log.x[-1].mean(axis=0)
    ax.plot(*mean, "k*", ms=11, label="final mean")
    ax.set_xlabel("$x_1$")
    ax.set_ylabel("$x_2$")
    ax.set_aspect("equal", adjustable="datalim")
    return _finish(fig, ax, path)


def plot_positions_time(log, path):
    """Position components against time (fallback for non-planar states)."""
    fig, ax = plt.subplots()
    K, N, n = log.x.shape
    for i in range(N):
        for d in range(n):
            label = f"agent {i + 1}" if n == 1 else f"agent {i + 1}[{d + 1}]"
            ax.plot(log.times, log.x[:, i, d], lw=1.0, label=label)
    ax.set_xlabel("t")
    ax.set_ylabel("position")
    return _finish(fig, ax, path)


def plot_velocities(log, path):
    """Velocity components against time."""
    fig, ax = plt.subplots()
    K, N, n = log.v.shape
    for i in range(N):
        for d in range(n):
            label = f"agent {i + 1}" if n == 1 else f"agent {i + 1}[{d + 1}]"
            ax.plot(log.times, log.v[:, i, d], lw=1.0, label=label)
    ax.set_xlabel("t")
    ax.set_ylabel("velocity")
    return _finish(fig, ax, path)


def plot_consensus_error(log, path):
    """Consensus error (and gradient-sum norm, when logged) on a log axis."""
    fig, ax = plt.subplots()
    ax.semilogy(log.times, np.maximum(log.consensus_err, 1e-16),
                label="consensus error")
    if np.isfinite(log.grad_sum_norm).any():
        ax.semilogy(log.times, np.maximum(log.grad_sum_norm, 1e-16),
                    label=r"$\|\sum_i \nabla_x L_i\|$")
    if np.isfinite(log.estimator_residual).any():
        ax.semilogy(log.times, np.maximum(log.estimator_residual, 1e-16),
                    label="estimator residual")
    ax.set_xlabel("t")
    return _finish(fig, ax, path)


def render_run_figures(log, out_dir, is_double: bool) -> list:
    """Standard figure set for a finished run; returns the written paths."""
    if len(log) == 0:
        return []
    written = []
    if log.x.shape[2] == 2:
        written.append(plot_positions_2d(log, out_dir / "positions_2d.svg"))
    else:
        written.append(plot_positions_time(log, out_dir / "positions_time.svg"))
    if is_double:
        written.append(plot_velocities(log, out_dir / "velocities.svg"))
    written.append(plot_consensus_error(log, out_dir / "consensus_error.svg"))
    return written
