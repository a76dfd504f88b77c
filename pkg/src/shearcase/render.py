"""Matplotlib rendering of pillowcase pictures and diagnostic figures.

Figures are written to files only (no interactive backends).  In
reproducible mode SVG output carries no creation date and uses a fixed
hash salt, so re-runs are byte-identical.
"""

from __future__ import annotations

import math

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .pillowcase import SINGULAR_POINTS, EmbeddedGraph
from .torus_dynamics.shearing import TWO_PI


def _save(fig, path, reproducible):
    path = str(path)
    if path.endswith(".svg"):
        with plt.rc_context({"svg.hashsalt": "shearcase"}):
            metadata = {"Date": None} if reproducible else None
            fig.savefig(path, metadata=metadata)
    else:
        fig.savefig(path, dpi=150)
    plt.close(fig)


def _split_wraps(vertices):
    """Split a cylinder polyline into pieces that do not cross beta = 0."""
    pieces = []
    current = [vertices[0]]
    for prev, cur in zip(vertices[:-1], vertices[1:]):
        d = cur[1] - prev[1]
        if abs(d) > math.pi:  # crossed the seam
            pieces.append(np.array(current))
            current = [cur]
        else:
            current.append(cur)
    pieces.append(np.array(current))
    return [p for p in pieces if len(p) >= 2]


def draw_pillowcase_graph(graph: EmbeddedGraph, path, title="", reproducible=False):
    """Fundamental-domain picture of a pillowcase graph, corners marked."""
    fig, ax = plt.subplots(figsize=(4.2, 6.0))
    colors = {"irreducible-arc": "tab:red", "reducible-line": "tab:blue",
              "other": "tab:gray"}
    for curve, label in zip(graph.edges, graph.labels):
        verts = curve.vertices
        if curve.closed:
            verts = np.vstack([verts, verts[:1]])
        for piece in _split_wraps(verts):
            ax.plot(piece[:, 0], piece[:, 1], color=colors[label], lw=1.4)
    for cx, cy in SINGULAR_POINTS:
        ax.plot([cx], [cy], marker="s", color="black", ms=5)
        if cy == 0.0:       # the corners also appear at beta = 2*pi
            ax.plot([cx], [TWO_PI], marker="s", color="black", ms=5)
    ax.set_xlim(-0.1, math.pi + 0.1)
    ax.set_ylim(-0.15, TWO_PI + 0.15)
    ax.set_xticks([0, math.pi / 2, math.pi])
    ax.set_xticklabels(["0", r"$\pi/2$", r"$\pi$"])
    ax.set_yticks([0, math.pi, TWO_PI])
    ax.set_yticklabels(["0", r"$\pi$", r"$2\pi$"])
    ax.set_xlabel(r"$\alpha$ (meridian angle)")
    ax.set_ylabel(r"$\beta$ (longitude angle)")
    if title:
        ax.set_title(title)
    # gluing pattern of the fundamental domain: folded sides, identified top/bottom
    for x in (0.0, math.pi):
        ax.axvline(x, color="black", lw=0.8, ls="--", alpha=0.5)
    for y in (0.0, TWO_PI):
        ax.axhline(y, color="black", lw=0.8, alpha=0.5)
    fig.tight_layout()
    _save(fig, path, reproducible)


def draw_deviation_curve(times, deviations, bound, path, reproducible=False):
    """Measured program-vs-reference deviation over time with its certified bound."""
    fig, ax = plt.subplots(figsize=(5.0, 3.2))
    ax.plot(times, deviations, color="tab:blue", label="measured sup deviation")
    ax.axhline(bound, color="tab:red", ls="--", label="certificate total")
    ax.set_xlabel("t")
    ax.set_ylabel("sup distance")
    ax.set_yscale("log" if np.all(np.asarray(deviations) > 0) else "linear")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    _save(fig, path, reproducible)


def draw_area_defect(defect_grid, path, title="", reproducible=False):
    """Heatmap of |det D psi - 1| over the torus grid."""
    fig, ax = plt.subplots(figsize=(4.6, 4.0))
    im = ax.imshow(defect_grid.T, origin="lower", extent=[0, TWO_PI, 0, TWO_PI],
                   cmap="magma")
    fig.colorbar(im, ax=ax, label=r"$|\det D\psi - 1|$")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    _save(fig, path, reproducible)
