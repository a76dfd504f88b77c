"""The quotient of the torus by (x, y) -> (-x, -y) and its cut-open cylinder.

The quotient is a topological sphere with four singular points, here always
handled through the fundamental domain [0, pi] x [0, 2*pi) with the two
vertical boundary lines folded by beta -> -beta.  Cutting along those lines
instead gives the cylinder C = [0, pi] x R/2piZ, where homological winding
in the circle factor is meaningful.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy import ndimage

from .errors import AmbiguousLift, PointOnGraph
from .torus_dynamics.shearing import TWO_PI, canonicalize

SINGULAR_POINTS = ((0.0, 0.0), (math.pi, 0.0), (0.0, math.pi), (math.pi, math.pi))


@dataclass(frozen=True)
class PillowcasePoint:
    """Canonical representative of {(a, b), (-a, -b)}: a in [0, pi], b in [0, 2*pi)."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (0.0 <= self.alpha <= math.pi):
            raise ValueError(f"alpha {self.alpha} outside [0, pi]")
        if not (0.0 <= self.beta < TWO_PI):
            raise ValueError(f"beta {self.beta} outside [0, 2*pi)")

    @property
    def is_singular(self):
        return (self.alpha in (0.0, math.pi)) and (self.beta in (0.0, math.pi))

    def as_array(self):
        return np.array([self.alpha, self.beta])

    def lift(self):
        """A torus representative of this point."""
        return np.array([self.alpha, self.beta])


def project(p):
    """Quotient projection of a torus point onto its canonical representative.

    project(tau(p)) == project(p); the four fixed points map to themselves.
    """
    p = canonicalize(np.asarray(p, dtype=float))
    alpha, beta = float(p[..., 0]), float(p[..., 1])
    if alpha > math.pi or (alpha in (0.0, math.pi) and beta > math.pi):
        alpha = TWO_PI - alpha if alpha > 0 else 0.0
        beta = (TWO_PI - beta) % TWO_PI
        if alpha > math.pi:  # guard against rounding at the fold
            alpha = math.pi
    return PillowcasePoint(alpha, beta)


def project_array(pts):
    """Vectorized projection returning raw (alpha, beta) coordinate pairs."""
    pts = canonicalize(np.asarray(pts, dtype=float))
    alpha = pts[..., 0].copy()
    beta = pts[..., 1].copy()
    flip = (alpha > math.pi) | (np.isin(alpha, (0.0, math.pi)) & (beta > math.pi))
    alpha[flip] = np.mod(-alpha[flip], TWO_PI)
    beta[flip] = np.mod(-beta[flip], TWO_PI)
    np.clip(alpha, 0.0, math.pi, out=alpha)
    return np.stack([alpha, beta], axis=-1)


@dataclass(frozen=True)
class CylinderCurve:
    """Polyline in the cut-open cylinder [0, pi] x R/2piZ.

    Consecutive vertices further apart than ``max_edge`` are refined by
    linear interpolation at construction (beta interpolated via the short
    circular representative), so winding numbers are always unambiguous.
    """

    vertices: np.ndarray
    closed: bool = False
    max_edge: float = 0.1

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 2:
            raise ValueError("vertices must be an (n, 2) array with n >= 2")
        if np.any(v[:, 0] < -1e-12) or np.any(v[:, 0] > math.pi + 1e-12):
            raise ValueError("alpha coordinates must lie in [0, pi]")
        v = v.copy()
        v[:, 0] = np.clip(v[:, 0], 0.0, math.pi)
        v[:, 1] = np.mod(v[:, 1], TWO_PI)
        v = _refine_polyline(v, self.closed, self.max_edge)
        object.__setattr__(self, "vertices", v)

    def __len__(self):
        return len(self.vertices)

    def edges(self):
        """Iterate (start, reduced displacement) for each polyline edge."""
        v = self.vertices
        nxt = np.roll(v, -1, axis=0) if self.closed else v[1:]
        cur = v if self.closed else v[:-1]
        disp = nxt - cur
        disp[:, 1] = np.mod(disp[:, 1] + np.pi, TWO_PI) - np.pi
        return cur, disp


def _refine_polyline(v, closed, max_edge):
    pieces = []
    n = len(v)
    last = n if closed else n - 1
    for i in range(last):
        a = v[i]
        b = v[(i + 1) % n]
        db = np.mod(b[1] - a[1] + np.pi, TWO_PI) - np.pi
        if abs(db) >= np.pi:
            raise AmbiguousLift("polyline edge moves by >= pi in the circle factor")
        seg = np.array([b[0] - a[0], db])
        length = float(np.hypot(*seg))
        k = max(1, int(math.ceil(length / max_edge)))
        ts = np.arange(k) / k
        pts = a[None, :] + ts[:, None] * seg[None, :]
        pieces.append(pts)
    if not closed:
        pieces.append(v[-1:].copy())
    out = np.concatenate(pieces, axis=0)
    out[:, 1] = np.mod(out[:, 1], TWO_PI)
    return out


def winding_number(curve: CylinderCurve):
    """Net number of times a closed curve wraps the circle factor of C.

    Sums the reduced beta increments; edges must stay shorter than pi in the
    circle factor (enforced at construction).
    """
    if not curve.closed:
        raise ValueError("winding number requires a closed curve")
    _, disp = curve.edges()
    total = float(np.sum(disp[:, 1]))
    w = total / TWO_PI
    if abs(w - round(w)) > 1e-6:
        raise AmbiguousLift(f"beta increments sum to a non-integral winding {w}")
    return int(round(w))


@dataclass(frozen=True)
class EmbeddedGraph:
    """A finite union of labelled polylines in the pillowcase."""

    edges: tuple
    labels: tuple = ()

    def __post_init__(self):
        edges = tuple(self.edges)
        labels = tuple(self.labels) if self.labels else tuple("other" for _ in edges)
        if len(labels) != len(edges):
            raise ValueError("one label per edge required")
        for lab in labels:
            if lab not in ("irreducible-arc", "reducible-line", "other"):
                raise ValueError(f"unknown edge label {lab!r}")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "labels", labels)

    def total_vertices(self):
        return sum(len(c) for c in self.edges)


def _rasterize_edges(graph: EmbeddedGraph, res):
    """Boolean (res, res) mask of cells touched by any edge, in the
    fundamental domain [0, pi] x [0, 2*pi)."""
    mask = np.zeros((res, res), dtype=bool)
    ha = math.pi / res
    hb = TWO_PI / res
    for curve in graph.edges:
        cur, disp = curve.edges()
        for a, d in zip(cur, disp):
            length = float(np.hypot(d[0], d[1] / 2.0))
            k = max(2, int(math.ceil(length / min(ha, hb) * 3)))
            ts = np.linspace(0.0, 1.0, k)
            pts = a[None, :] + ts[:, None] * d[None, :]
            ia = np.clip((pts[:, 0] / ha).astype(int), 0, res - 1)
            ib = np.mod(np.floor(pts[:, 1] / hb).astype(int), res)
            mask[ia, ib] = True
    return mask


def _merge_components(labels, pairs):
    """Union-find merge of ndimage labels along extra adjacency ``pairs``."""
    parent = {}

    def find(x):
        while parent.get(x, x) != x:
            parent[x] = parent.get(parent[x], parent[x])
            x = parent[x]
        return x

    for a, b in pairs:
        if a == 0 or b == 0:
            continue
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    lut = np.arange(labels.max() + 1)
    for u in np.unique(labels):
        lut[u] = find(int(u))
    return lut[labels]


def _pillowcase_components(free):
    """Label connected components of the free cells, honouring the circle
    wrap in beta and the folds at alpha = 0 and alpha = pi."""
    labels, _ = ndimage.label(free)
    res = labels.shape[0]
    pairs = []
    # beta wrap: column res-1 adjacent to column 0
    for i in range(res):
        if free[i, 0] and free[i, res - 1]:
            pairs.append((labels[i, 0], labels[i, res - 1]))
    # folds: crossing alpha = 0 from cell (0, j) re-enters at (0, res-1-j)
    for j in range(res):
        jj = (res - 1 - j) % res
        if free[0, j] and free[0, jj]:
            pairs.append((labels[0, j], labels[0, jj]))
        if free[res - 1, j] and free[res - 1, jj]:
            pairs.append((labels[res - 1, j], labels[res - 1, jj]))
    return _merge_components(labels, pairs)


def _torus_components(free):
    """Connected components on the full torus raster (both axes wrap)."""
    labels, _ = ndimage.label(free)
    n = labels.shape[0]
    pairs = []
    for i in range(n):
        if free[i, 0] and free[i, n - 1]:
            pairs.append((labels[i, 0], labels[i, n - 1]))
        if free[0, i] and free[n - 1, i]:
            pairs.append((labels[0, i], labels[n - 1, i]))
    return _merge_components(labels, pairs)


def _near_corner(graph: EmbeddedGraph, res, cells=2):
    ha = math.pi / res
    hb = TWO_PI / res
    margin_a, margin_b = cells * ha, cells * hb
    for curve in graph.edges:
        v = curve.vertices
        for ca, cb in SINGULAR_POINTS:
            da = np.abs(v[:, 0] - ca)
            db = np.minimum(np.mod(v[:, 1] - cb, TWO_PI), np.mod(cb - v[:, 1], TWO_PI))
            if np.any((da < margin_a) & (db < margin_b)):
                return True
    return False


def _separates_double_cover(graph, p, q, res):
    """Fallback separation test in the branched double cover (the torus)."""
    mask = np.zeros((res, res), dtype=bool)
    hb = TWO_PI / res
    for curve in graph.edges:
        cur, disp = curve.edges()
        for a, d in zip(cur, disp):
            for sign in (1.0, -1.0):
                length = float(np.hypot(d[0], d[1]) )
                k = max(2, int(math.ceil(length / hb * 3)))
                ts = np.linspace(0.0, 1.0, k)
                pts = sign * (a[None, :] + ts[:, None] * d[None, :])
                ia = np.mod(np.floor(pts[:, 0] / hb).astype(int), res)
                ib = np.mod(np.floor(pts[:, 1] / hb).astype(int), res)
                mask[ia, ib] = True
    free = ~mask
    comps = _torus_components(free)

    def cell_of(pt):
        ia = int(np.mod(np.floor(pt[0] / hb), res))
        ib = int(np.mod(np.floor(pt[1] / hb), res))
        if not free[ia, ib]:
            raise PointOnGraph(f"query point {tuple(pt)} lies on a graph cell")
        return comps[ia, ib]

    return bool(cell_of(p.as_array()) != cell_of(q.as_array()))


def separates(graph: EmbeddedGraph, p: PillowcasePoint, q: PillowcasePoint,
              resolution=512, corner_margin_cells=2):
    """Flood-fill separation test: does the graph disconnect p from q?

    Rasterizes the fundamental domain with its boundary identifications,
    removes cells hit by edges, and compares the component labels of the two
    query cells.  When an edge passes within ``corner_margin_cells`` of a
    singular point the computation moves to the branched double cover, where
    the folds need no special casing.  The answer is resolution-dependent;
    re-query at doubled resolution until two consecutive calls agree.
    """
    if _near_corner(graph, resolution, corner_margin_cells):
        return _separates_double_cover(graph, p, q, resolution)
    mask = _rasterize_edges(graph, resolution)
    free = ~mask
    comps = _pillowcase_components(free)
    ha = math.pi / resolution
    hb = TWO_PI / resolution

    def cell_of(point):
        ia = min(int(point.alpha / ha), resolution - 1)
        ib = int(np.mod(np.floor(point.beta / hb), resolution))
        if not free[ia, ib]:
            raise PointOnGraph(f"query point {point} lies on a graph cell")
        return comps[ia, ib]

    return bool(cell_of(p) != cell_of(q))


def graph_has_essential_cycle(graph: EmbeddedGraph, resolution=512):
    """Search the rasterized edge cells of C for a closed walk with nonzero
    winding in the circle factor.

    Cells carry a lifted beta potential during BFS; an adjacency whose
    accumulated increments disagree witnesses an essential cycle.  The
    cylinder raster wraps only in beta (no folds: C is the cut-open model).
    """
    mask = _rasterize_edges(graph, resolution)
    res = resolution
    potential = {}
    for start in zip(*np.nonzero(mask)):
        if start in potential:
            continue
        potential[start] = 0
        stack = [start]
        while stack:
            (ia, ib) = stack.pop()
            base = potential[(ia, ib)]
            for da, db in ((1, 0), (-1, 0), (0, 1), (0, -1),
                           (1, 1), (1, -1), (-1, 1), (-1, -1)):
                ja = ia + da
                jb = (ib + db) % res
                if not (0 <= ja < res) or not mask[ja, jb]:
                    continue
                lifted = base + db
                if (ja, jb) in potential:
                    if potential[(ja, jb)] != lifted:
                        return True
                else:
                    potential[(ja, jb)] = lifted
                    stack.append((ja, jb))
    return False
