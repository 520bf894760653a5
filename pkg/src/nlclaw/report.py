"""Render run artifacts as figures saved next to the CSV output."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .constraint import classify_regions
from .stepper import ConvergenceTable, Trajectory

_PNG_META = {"Software": "nlclaw"}  # fixed metadata keeps reruns byte-identical


def _save(fig, path):
    fig.savefig(path, dpi=144, metadata=_PNG_META)
    plt.close(fig)


def plot_snapshots(traj: Trajectory, path, max_curves: int = 8) -> None:
    """Overlay the solution profile at evenly chosen snapshot times."""
    snaps = traj.outer_snapshots()
    picks = np.unique(np.linspace(0, len(snaps) - 1, max_curves).astype(int))
    xs = traj.scenario.w0.mesh.centers()
    M = traj.scenario.constraint.M
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    for idx in picks:
        snap = snaps[idx]
        ax.plot(xs, snap.values, lw=1.2, label=f"t = {snap.time:.3g}")
    if np.isfinite(M):
        ax.axhline(M, color="k", ls=":", lw=0.8)
        ax.axhline(-M, color="k", ls=":", lw=0.8)
    ax.set_xlabel("x")
    ax.set_ylabel("w")
    ax.legend(fontsize=8, ncol=2)
    ax.set_title("solution snapshots")
    fig.tight_layout()
    _save(fig, path)


def plot_diagnostics(traj: Trajectory, path) -> None:
    """Time series of every monitored quantity against its bound."""
    d = traj.diagnostics
    t = np.array([r.t for r in d])
    M = traj.scenario.constraint.M
    fig, axes = plt.subplots(2, 2, figsize=(9.0, 6.0), sharex=True)

    ax = axes[0, 0]
    ax.plot(t, [r.linf for r in d], marker=".", lw=1.0)
    if np.isfinite(M):
        ax.axhline(M, color="r", ls="--", lw=0.8, label="bound M")
        ax.legend(fontsize=8)
    ax.set_ylabel("sup |w|")

    ax = axes[0, 1]
    ax.plot(t, [r.l1 for r in d], marker=".", lw=1.0)
    ax.axhline(d[0].l1, color="r", ls="--", lw=0.8, label="initial L1")
    ax.legend(fontsize=8)
    ax.set_ylabel("L1 norm")

    ax = axes[1, 0]
    ax.plot(t, [r.tv for r in d], marker=".", lw=1.0, label="TV")
    ax.plot(t, [r.tv_bound_rhs for r in d], color="r", ls="--", lw=0.8,
            label="growth bound")
    ax.set_yscale("log")
    ax.legend(fontsize=8)
    ax.set_ylabel("total variation")
    ax.set_xlabel("t")

    ax = axes[1, 1]
    res = np.array([r.max_entropy_residual for r in d])
    ax.plot(t, np.maximum(res, 1e-20), marker=".", lw=1.0)
    ax.axhline(1e-10, color="r", ls="--", lw=0.8, label="tolerance")
    ax.set_yscale("log")
    ax.legend(fontsize=8)
    ax.set_ylabel("max entropy residual (clipped)")
    ax.set_xlabel("t")

    fig.suptitle("run diagnostics")
    fig.tight_layout()
    _save(fig, path)


def plot_regions(traj: Trajectory, path) -> None:
    """Heat map of the regime labels over the (x, t) plane."""
    snaps = traj.outer_snapshots()
    c = traj.scenario.constraint
    codes = {"I": 0.0, "K": 1.0, "J": 2.0}
    rows = []
    for snap in snaps:
        labels = classify_regions(snap, c).labels
        rows.append([codes[l] for l in labels])
    grid = np.array(rows)
    mesh = traj.scenario.w0.mesh
    times = [s.time for s in snaps]
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    im = ax.pcolormesh(
        mesh.interfaces(),
        np.array(times + [times[-1] + (times[-1] - times[-2] if len(times) > 1 else 1.0)]),
        grid, cmap="viridis", vmin=0.0, vmax=2.0, shading="flat",
    )
    cbar = fig.colorbar(im, ax=ax, ticks=[0.0, 1.0, 2.0])
    cbar.ax.set_yticklabels(["I", "K", "J"])
    ax.set_xlabel("x")
    ax.set_ylabel("t")
    ax.set_title("regime regions")
    fig.tight_layout()
    _save(fig, path)


def plot_stability(records, path) -> None:
    """Separation curves of every stability pair with their envelopes."""
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    for i, rec in enumerate(records):
        ax.plot(rec.times, np.maximum(rec.psi, 1e-300), marker=".", lw=1.0,
                label=f"pair {i}: psi(0) = {rec.psi0:.2g}")
    ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("L1 separation")
    ax.legend(fontsize=8)
    ax.set_title("pairwise separation")
    fig.tight_layout()
    _save(fig, path)


def plot_convergence(table: ConvergenceTable, path) -> None:
    """Distance to the reference run against dx on log-log axes."""
    dxs = np.array([r.dx for r in table.rows])
    dists = np.array([r.l1_distance for r in table.rows])
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    ax.loglog(dxs, np.maximum(dists, 1e-300), marker="o", lw=1.0, label="L1 distance")
    if np.all(dists > 0):
        guide = dists[0] * dxs / dxs[0]
        ax.loglog(dxs, guide, ls="--", color="gray", lw=0.8, label="first order")
    ax.invert_xaxis()
    ax.set_xlabel("dx")
    ax.set_ylabel("L1 distance to reference")
    ax.legend(fontsize=8)
    ax.set_title("self-convergence")
    fig.tight_layout()
    _save(fig, path)
