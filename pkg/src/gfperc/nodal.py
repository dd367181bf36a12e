"""Discrete nodal curves: marching triangles on the face-centred lattice.

Every eps-square of the lattice is cut into four triangles by its centre. A
triangle whose vertices are not all the same colour has exactly two
bi-coloured edges, and contributes the segment joining their midpoints. The
segments chain into polygonal curves through shared edge midpoints; a curve
that reaches a window-boundary edge stops there and is flagged as exiting.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .lattice import EpsRegion
from .sampler import FieldSample, InvalidRegionError, ShapeError

# triangles of a square, by edge slot: H bottom, H top, V left, V right, then diagonals
# from the centre to the corners BL, BR, TR, TL
_TRIANGLES = (
    ("Hb", "BL", "BR"),
    ("Vr", "BR", "TR"),
    ("Ht", "TR", "TL"),
    ("Vl", "TL", "BL"),
)


@dataclass(frozen=True)
class NodalCurveSet:
    """Polygonal approximation of the level set ``{f = -p}``.

    ``midpoints`` holds the bi-coloured edge midpoints (real coordinates),
    ``segments`` pairs of indices into ``midpoints`` with their ``faces``
    (``4 * square + triangle``), ``labels`` the component of every midpoint.
    """

    eps: float
    window: tuple[float, float, float, float]
    midpoints: np.ndarray = field(repr=False)
    segments: np.ndarray = field(repr=False)
    faces: np.ndarray = field(repr=False)
    labels: np.ndarray = field(repr=False)
    closed: np.ndarray = field(repr=False)
    bbox: np.ndarray = field(repr=False)

    @property
    def n_components(self) -> int:
        return len(self.closed)

    def component_points(self, k: int) -> list[tuple[float, float]]:
        """Midpoints of component ``k`` in curve order (first point repeated if closed)."""
        nodes = np.flatnonzero(self.labels == k)
        local = {int(n): i for i, n in enumerate(nodes)}
        adj = [[] for _ in nodes]
        for a, b in self.segments:
            if int(a) in local:
                adj[local[int(a)]].append(local[int(b)])
                adj[local[int(b)]].append(local[int(a)])
        start = next((i for i, nb in enumerate(adj) if len(nb) == 1), 0)
        order, prev, cur = [start], -1, start
        while True:
            nxt = [j for j in adj[cur] if j != prev]
            if not nxt or nxt[0] == start:
                break
            prev, cur = cur, nxt[0]
            order.append(cur)
        if self.closed[k]:
            order.append(start)
        return [tuple(float(c) for c in self.midpoints[nodes[i]]) for i in order]

    def to_json(self) -> str:
        comps = [{"closed": bool(self.closed[k]), "points": [list(p) for p in self.component_points(k)]}
                 for k in range(self.n_components)]
        return json.dumps({"eps": self.eps, "window": list(self.window), "components": comps})


def _square_corners(sample: FieldSample, eps: float):
    grid = sample.grid
    if not math.isclose(eps, 2 * grid.spacing, rel_tol=1e-12):
        raise ShapeError(f"mesh {eps} is not twice the grid spacing {grid.spacing}")
    i0, j0 = grid.index_origin
    nx, ny = grid.extent
    a0 = i0 + (i0 % 2)           # first even half-unit coordinate
    b0 = j0 + (j0 % 2)
    mx = (i0 + nx - 1 - a0) // 2  # number of whole eps-squares
    my = (j0 + ny - 1 - b0) // 2
    return a0, b0, a0 - i0, b0 - j0, mx, my


def trace_nodal(sample: FieldSample, eps: float, p: float = 0.0) -> NodalCurveSet:
    """Trace the discrete level curves of ``sample`` at level ``-p`` on the lattice of mesh ``eps``."""
    a0, b0, di, dj, mx, my = _square_corners(sample, eps)
    h = eps / 2
    window = (a0 * h, (a0 + 2 * mx) * h, b0 * h, (b0 + 2 * my) * h)
    black = sample.values >= -p
    if mx < 1 or my < 1:
        empty = np.zeros((0, 2))
        return NodalCurveSet(eps, window, empty, np.zeros((0, 2), int), np.zeros(0, int),
                             np.zeros(0, int), np.zeros(0, bool), np.zeros((0, 4)))
    cint = black[di:di + 2 * mx + 1:2, dj:dj + 2 * my + 1:2]
    ccen = black[di + 1:di + 2 * mx:2, dj + 1:dj + 2 * my:2]

    # edge arrays: bi-coloured flag and midpoint (half units) for each family
    fh = cint[:-1, :] != cint[1:, :]                       # (mx, my+1)
    fv = cint[:, :-1] != cint[:, 1:]                       # (mx+1, my)
    corners = {"BL": cint[:-1, :-1], "BR": cint[1:, :-1], "TR": cint[1:, 1:], "TL": cint[:-1, 1:]}
    fd = {k: c != ccen for k, c in corners.items()}

    aa = np.arange(mx + 1)[:, None]
    bb = np.arange(my + 1)[None, :]
    nh, nv, nsq = mx * (my + 1), (mx + 1) * my, mx * my
    id_h = (aa[:-1] * (my + 1) + bb).astype(np.int64)                 # (mx, my+1)
    id_v = (nh + aa * my + bb[:, :-1]).astype(np.int64)               # (mx+1, my)
    sq = aa[:-1] * my + bb[:, :-1]                                    # (mx, my)
    id_d = {k: nh + nv + 4 * sq + i for i, k in enumerate(("BL", "BR", "TR", "TL"))}
    n_edges = nh + nv + 4 * nsq

    mid = np.empty((n_edges, 2))
    gx = np.broadcast_to(a0 + 2 * aa, (mx + 1, my + 1))
    gy = np.broadcast_to(b0 + 2 * bb, (mx + 1, my + 1))
    mid[id_h.ravel()] = np.stack([(gx[:-1] + 1).ravel(), gy[:-1].ravel()], 1)
    mid[id_v.ravel()] = np.stack([gx[:, :-1].ravel(), (gy[:, :-1] + 1).ravel()], 1)
    cx, cy = gx[:-1, :-1] + 1.0, gy[:-1, :-1] + 1.0
    for k, (sx, sy) in zip(("BL", "BR", "TR", "TL"), ((-1, -1), (1, -1), (1, 1), (-1, 1))):
        mid[id_d[k].ravel()] = np.stack([(cx + 0.5 * sx).ravel(), (cy + 0.5 * sy).ravel()], 1)
    mid *= h

    slots = {
        "Hb": (id_h[:, :-1], fh[:, :-1]), "Ht": (id_h[:, 1:], fh[:, 1:]),
        "Vl": (id_v[:-1, :], fv[:-1, :]), "Vr": (id_v[1:, :], fv[1:, :]),
    }
    for k in id_d:
        slots[k] = (id_d[k], fd[k])

    seg_a, seg_b, seg_f = [], [], []
    for t, tri in enumerate(_TRIANGLES):
        ids = [slots[s][0] for s in tri]
        flags = [slots[s][1] for s in tri]
        for u, w in ((0, 1), (1, 2), (0, 2)):
            m = flags[u] & flags[w]
            seg_a.append(ids[u][m])
            seg_b.append(ids[w][m])
            seg_f.append((4 * sq + t)[m])
    seg_a = np.concatenate(seg_a)
    seg_b = np.concatenate(seg_b)
    faces = np.concatenate(seg_f)

    nodes = np.unique(np.concatenate([seg_a, seg_b]))
    remap = np.full(n_edges, -1, dtype=np.int64)
    remap[nodes] = np.arange(len(nodes))
    sa, sb = remap[seg_a], remap[seg_b]
    n = len(nodes)
    graph = sparse.coo_matrix((np.ones(len(sa)), (sa, sb)), shape=(n, n))
    ncomp, labels = csgraph.connected_components(graph, directed=False)
    degree = np.bincount(sa, minlength=n) + np.bincount(sb, minlength=n)
    closed = np.ones(ncomp, dtype=bool)
    closed[labels[degree != 2]] = False
    pts = mid[nodes]
    bbox = np.empty((ncomp, 4))
    order = np.argsort(labels, kind="stable")
    starts = np.searchsorted(labels[order], np.arange(ncomp))
    if n:
        bbox[:, 0] = np.minimum.reduceat(pts[order, 0], starts)
        bbox[:, 1] = np.maximum.reduceat(pts[order, 0], starts)
        bbox[:, 2] = np.minimum.reduceat(pts[order, 1], starts)
        bbox[:, 3] = np.maximum.reduceat(pts[order, 1], starts)
    segs = np.stack([sa, sb], axis=1)
    return NodalCurveSet(eps, window, pts, segs, faces, labels, closed, bbox)


def count_components(curves: NodalCurveSet, rect: EpsRegion) -> int:
    """Closed curves lying entirely in the closed rectangle ``rect``."""
    x0, x1, y0, y1 = rect.to_points()
    w = curves.window
    m = 2 * curves.eps - 1e-9
    if x0 < w[0] + m or x1 > w[1] - m or y0 < w[2] + m or y1 > w[3] - m:
        raise InvalidRegionError("rectangle must keep a 2*eps margin from the window")
    if curves.n_components == 0:
        return 0
    tol = 1e-9 * curves.eps
    b = curves.bbox
    inside = (b[:, 0] >= x0 - tol) & (b[:, 1] <= x1 + tol) & (b[:, 2] >= y0 - tol) & (b[:, 3] <= y1 + tol)
    return int((inside & curves.closed).sum())
