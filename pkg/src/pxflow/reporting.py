"""Artifact emission: delimited output with 17 significant digits and
matplotlib SVG figures rendered next to it.  Figures are written with a
fixed hash salt and no date metadata so identical runs produce identical
files."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

plt.rcParams["svg.hashsalt"] = "pxflow"

__all__ = ["fmt", "write_csv", "write_json", "save_figure",
           "write_trajectory_csv", "line_plot"]


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def write_csv(path, header, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(x) for x in row))
    path.write_text("\n".join(lines) + "\n")


def write_json(path, obj) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def save_figure(fig, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def line_plot(path, xs, ys_by_label, xlabel, ylabel, title,
              logy=False, logx=False) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, ys in ys_by_label.items():
        ax.plot(xs, ys, label=label)
    if logy:
        ax.set_yscale("log")
    if logx:
        ax.set_xscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    if len(ys_by_label) > 1:
        ax.legend()
    fig.tight_layout()
    save_figure(fig, path)


def write_trajectory_csv(path, traj, dom) -> None:
    """Full-grid header t,node_0..node_N; constrained header lists the
    Omega_1-closure nodes then the subdomain scalars."""
    from .semiflow import LimitState

    first = traj.samples[0]
    times = traj.times()
    if isinstance(first, LimitState):
        mask = (dom.node_subdomain < 0) | (dom.node_region == 2)
        idx = np.nonzero(mask)[0]
        header = (["t"] + [f"omega1_{k}" for k in range(len(idx))]
                  + [f"s_{i + 1}" for i in range(dom.m)])
        rows = []
        for t, s in zip(times, traj.samples):
            full = s.embed().values
            rows.append([t, *full[idx], *s.subdomain_values])
    else:
        header = ["t"] + [f"node_{k}" for k in range(dom.N + 1)]
        rows = [[t, *s.values] for t, s in zip(times, traj.samples)]
    write_csv(path, header, rows)
