"""Diagnostic SVG figures: states with a spike raster, and phase portraits."""
from __future__ import annotations

from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .simulator import Trace  # noqa: E402

# fixed ids and no timestamp, so identical traces give identical files
plt.rcParams["svg.hashsalt"] = "neurospike"
_META = {"Date": None}


def _save(fig, path) -> Path:
    path = Path(path)
    fig.savefig(path, format="svg", metadata=_META)
    plt.close(fig)
    return path


def plot_states(trace: Trace, path, reference: Optional[Trace] = None, title: str = "") -> Path:
    """State coordinates over time; spike raster underneath when there are spikes."""
    S, N, n = trace.x.shape
    rows = n + (1 if trace.n_spikes else 0)
    fig, axes = plt.subplots(rows, 1, sharex=True, figsize=(8, 2.4 * rows), squeeze=False)
    axes = axes[:, 0]
    for d in range(n):
        ax = axes[d]
        for i in range(N):
            ax.plot(trace.t, trace.x[:, i, d], lw=0.8, label=f"agent {i + 1}")
        if reference is not None:
            ax.plot(reference.t, reference.x[:, 0, d], "k--", lw=1.0, label="blended")
        ax.set_ylabel(f"x[{d + 1}]")
    axes[0].legend(loc="upper right", fontsize=7, ncol=min(N + 1, 5))
    if trace.n_spikes:
        ax = axes[-1]
        row = trace.spike_agent * n + trace.spike_dim
        for sign, color in ((1, "tab:red"), (-1, "tab:blue")):
            sel = trace.spike_sign == sign
            # rasterized: long runs log hundreds of thousands of spikes
            ax.plot(trace.spike_t[sel], row[sel] + 1, ls="none", marker="|", ms=4, mew=0.5, color=color,
                    rasterized=True)
        ax.set_ylabel("amp")
        ax.set_ylim(0.5, N * n + 0.5)
    axes[-1].set_xlabel("t [s]")
    if title:
        axes[0].set_title(title)
    fig.tight_layout()
    return _save(fig, path)


def plot_phase(trace: Trace, path, reference: Optional[Trace] = None, split: Optional[float] = None,
               title: str = "") -> Path:
    """Phase portrait of two-dimensional states; ``split`` shades samples before that time."""
    if trace.x.shape[2] != 2:
        raise ValueError("phase portraits need a two-dimensional state")
    fig, ax = plt.subplots(figsize=(6, 6))
    late = np.ones(len(trace.t), bool) if split is None else trace.t >= split
    for i in range(trace.x.shape[1]):
        (line,) = ax.plot(trace.x[late, i, 0], trace.x[late, i, 1], lw=0.7, label=f"agent {i + 1}")
        if split is not None:
            ax.plot(trace.x[~late, i, 0], trace.x[~late, i, 1], lw=0.5, alpha=0.3, color=line.get_color())
    if reference is not None:
        ax.plot(reference.x[:, 0, 0], reference.x[:, 0, 1], "k--", lw=1.0, label="blended")
    ax.set_xlabel("x[1]")
    ax.set_ylabel("x[2]")
    ax.legend(fontsize=7)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return _save(fig, path)
