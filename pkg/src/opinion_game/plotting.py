"""SVG figures: judgment time series and planar trajectories.

Each agent has one color. True judgments are solid lines and expressed judgments
dotted. Series carry SVG ids ``x-<agent>-<coord>`` and ``omega-<agent>-<coord>``
(plane plots: ``x-<agent>`` and ``omega-<agent>``) so the output is easy to inspect.
"""
from __future__ import annotations

import io

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

PLOT_KINDS = ("timeseries", "plane")


def _trajectories(bundle):
    traj = getattr(bundle, "trajectories", bundle)
    return traj.times, np.asarray(traj.states), np.asarray(traj.controls), getattr(traj, "name", "")


def _svg(fig) -> str:
    buf = io.StringIO()
    with plt.rc_context({"svg.hashsalt": "opinion-game", "svg.fonttype": "none"}):
        fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return buf.getvalue()


def _timeseries(times, x, w, title):
    n, d = x.shape[1], x.shape[2]
    fig, axes = plt.subplots(d, 1, figsize=(7, 3.2 * d), squeeze=False, sharex=True)
    colors = plt.get_cmap("tab10" if n <= 10 else "viridis")
    for c in range(d):
        ax = axes[c, 0]
        for i in range(n):
            color = colors(i % 10) if n <= 10 else colors(i / max(n - 1, 1))
            ax.plot(times, x[:, i, c], "-", color=color, lw=1.4, gid=f"x-{i}-{c}")
            ax.plot(times, w[:, i, c], ":", color=color, lw=1.4, gid=f"omega-{i}-{c}")
        ax.set_ylabel("judgment" if d == 1 else f"coordinate {c}")
    axes[-1, 0].set_xlabel("t")
    axes[0, 0].set_title(title)
    fig.tight_layout()
    return fig


def _plane(times, x, w, title):
    n = x.shape[1]
    fig, ax = plt.subplots(figsize=(5.5, 5.5))
    colors = plt.get_cmap("tab10")
    for i in range(n):
        color = colors(i % 10)
        ax.plot(x[:, i, 0], x[:, i, 1], "-", color=color, lw=1.4, gid=f"x-{i}")
        ax.plot(w[:, i, 0], w[:, i, 1], ":", color=color, lw=1.4, gid=f"omega-{i}")
        ax.plot(x[0, i, 0], x[0, i, 1], "o", color=color, ms=5, gid=f"start-{i}")
        ax.plot(x[-1, i, 0], x[-1, i, 1], "s", color=color, ms=5, gid=f"end-x-{i}")
        ax.plot(w[-1, i, 0], w[-1, i, 1], "D", color=color, ms=4, mfc="none", gid=f"end-omega-{i}")
    ax.set_aspect("equal")
    ax.set_xlabel("coordinate 0")
    ax.set_ylabel("coordinate 1")
    ax.set_title(title)
    fig.tight_layout()
    return fig


def emit_plot(bundle, kind: str = "timeseries") -> str:
    """Standalone SVG document for a result bundle or :class:`~opinion_game.scenario.Trajectories`."""
    if kind not in PLOT_KINDS:
        raise ValueError(f"unknown plot kind {kind!r}; expected one of {PLOT_KINDS}")
    times, x, w, name = _trajectories(bundle)
    if kind == "plane" and x.shape[2] != 2:
        raise ValueError(f"plane plots need d == 2, got d == {x.shape[2]}")
    fig = (_plane if kind == "plane" else _timeseries)(times, x, w, name)
    return _svg(fig)
