"""Self-contained SVG trajectory plots (control, speed, margin panels)."""
from __future__ import annotations

from pathlib import Path

import matplotlib
matplotlib.use("svg")
import matplotlib.pyplot as plt
import numpy as np

# keep emitted SVG byte-stable across runs
plt.rcParams["svg.hashsalt"] = "corridor-opt"


def plot_samples(rows: np.ndarray, out_path: str | Path, title: str = "") -> Path:
    """Render sample rows (vehicle_id, t, p, v, u, margin) to one SVG file."""
    out_path = Path(out_path)
    fig, axes = plt.subplots(3, 1, figsize=(7.0, 8.0), sharex=True)
    ids = np.unique(rows[:, 0]).astype(int)
    for vid in ids:
        sel = rows[rows[:, 0] == vid]
        t = sel[:, 1]
        label = f"vehicle {vid}" if len(ids) <= 8 else None
        axes[0].plot(t, sel[:, 4], lw=1.0, label=label)
        axes[1].plot(t, sel[:, 3], lw=1.0, label=label)
        margin = sel[:, 5]
        finite = np.isfinite(margin)
        if finite.any():
            axes[2].plot(t[finite], margin[finite], lw=1.0, label=label)
    axes[0].set_ylabel("control u [m/s$^2$]")
    axes[1].set_ylabel("speed v [m/s]")
    axes[2].set_ylabel("margin s $-$ $\\delta$ [m]")
    axes[2].set_xlabel("time [s]")
    axes[2].axhline(0.0, color="k", lw=0.6, ls="--")
    if title:
        axes[0].set_title(title)
    if len(ids) <= 8:
        axes[0].legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, metadata={"Date": None})
    plt.close(fig)
    return out_path
