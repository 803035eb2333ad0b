"""SVG figures for the CLI, rendered with matplotlib's SVG backend.

Figures are written with no date metadata and a fixed hash salt, so the
same data gives the same file.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("svg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_RC = {"svg.hashsalt": "hardylab", "svg.fonttype": "none", "figure.figsize": (6.0, 4.0)}


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def line_plot(path, series, xlabel, ylabel, title=None, hlines=(), logx=False):
    """``series`` is a list of ``(x, y, label)``; ``hlines`` of ``(y, label)``."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        for x, y, label in series:
            ax.plot(x, y, marker=".", label=label)
        for y, label in hlines:
            ax.axhline(y, color="0.4", linestyle="--", linewidth=0.8, label=label)
        if logx:
            ax.set_xscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        if series or hlines:
            ax.legend(loc="best", fontsize="small")
        fig.tight_layout()
        _save(fig, path)


def mesh_plot(path, mesh, title=None):
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        v = mesh.vertices
        ax.triplot(v[:, 0], v[:, 1], mesh.triangles, linewidth=0.3, color="0.2")
        b = np.flatnonzero(mesh.boundary)
        ax.plot(v[b, 0], v[b, 1], ".", markersize=1.5, color="C3")
        ax.set_aspect("equal")
        if title:
            ax.set_title(title)
        fig.tight_layout()
        _save(fig, path)
