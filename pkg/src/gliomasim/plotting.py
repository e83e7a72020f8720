"""Figure rendering for simulation outputs.

All functions write PNG files via the Agg backend; nothing here opens a
display.  Each returns the path it wrote so callers can fold the file
into a run manifest.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
from mpl_toolkits.mplot3d import Axes3D  # noqa: F401,E402

from .model import G1, G3, G4, STATE_NAMES
from .solver import PortraitEnsemble, Trajectory

_SERIES_STYLE = {
    "g1": dict(color="tab:green", label="glial"),
    "g2": dict(color="tab:red", label="sensitive glioma"),
    "g3": dict(color="tab:purple", label="resistant glioma"),
    "g4": dict(color="tab:orange", label="endothelial"),
    "g5": dict(color="tab:blue", label="neurons"),
    "q": dict(color="tab:gray", label="chemo agent", linestyle="--"),
    "y": dict(color="tab:brown", label="anti-angiogenic agent", linestyle="--"),
}


def render_trajectory(traj: Trajectory, path: Path, title: str = "") -> Path:
    """Time series of all seven populations plus the total glioma burden."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(9, 5.5))
    for i, name in enumerate(STATE_NAMES):
        ax.plot(traj.times, traj.states[:, i], lw=1.4, **_SERIES_STYLE[name])
    ax.plot(traj.times, traj.burden, color="black", lw=2.0,
            label="glioma burden", alpha=0.7)
    ax.set_xlabel("time (days)")
    ax.set_ylabel("scaled density / concentration")
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize=8, ncol=2)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_portrait(ensemble: PortraitEnsemble, path: Path, title: str = "") -> Path:
    """3D phase portrait in the (g1, g3, g4) subspace."""
    path = Path(path)
    fig = plt.figure(figsize=(7, 6))
    ax = fig.add_subplot(projection="3d")
    for traj, label in zip(ensemble.trajectories, ensemble.labels):
        ax.plot(traj.states[:, G1], traj.states[:, G3], traj.states[:, G4],
                lw=1.2, label=label)
        ax.scatter(*traj.states[0, [G1, G3, G4]], marker="o", s=25)
        ax.scatter(*traj.states[-1, [G1, G3, G4]], marker="x", s=40)
    ax.set_xlabel("glial")
    ax.set_ylabel("resistant glioma")
    ax.set_zlabel("endothelial")
    if title:
        ax.set_title(title)
    if len(ensemble.labels) <= 8:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_sweep(values, trajectories, path: Path, parameter: str = "rho",
                 title: str = "") -> Path:
    """Glioma-burden curves for a family of runs over one parameter."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(9, 5.5))
    cmap = plt.get_cmap("viridis")
    n = max(len(values) - 1, 1)
    for i, (v, traj) in enumerate(zip(values, trajectories)):
        ax.plot(traj.times, traj.burden, color=cmap(i / n), lw=1.6,
                label=f"{parameter} = {v:g}")
    ax.set_xlabel("time (days)")
    ax.set_ylabel("glioma burden")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
