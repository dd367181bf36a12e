"""Crossing, circuit, arm, Tassion and pivotal-pattern events on colourings.

Monochromatic clusters are labelled on an "edge-augmented" image of the
region: the half-unit grid carries the vertex colours at vertex pixels, and a
non-vertex pixel ``(odd, even)`` (resp. ``(even, odd)``) is switched on when
the two integer vertices of the horizontal (resp. vertical) axis edge through
it are both on. With 8-connectivity the components of that image are exactly
the lattice clusters: diagonal pixel neighbours of opposite parity are the
integer-vertex/face-centre edges, and every other pixel adjacency passes
through an axis edge whose endpoints are already joined.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import ndimage

from .lattice import (ANNULUS, CENTRE_NEIGHBOURS, INTEGER_NEIGHBOURS, RECTANGLE, Coloring,
                      EpsRegion, InvalidVertexError, is_vertex, to_half_units)
from .sampler import InvalidRegionError

ABOVE = "above"
BELOW = "below"
LR = "LR"
TB = "TB"

_EIGHT = np.ones((3, 3), dtype=bool)


class RegionKindError(TypeError):
    pass


class UnsupportedVertexError(ValueError):
    """Pattern detection is not defined at region corners."""


class Pattern(Enum):
    NONE = "none"
    ALT4_INTERIOR = "alt4_interior"
    ALT3_BOUNDARY = "alt3_boundary"


def _side_colour(side: str) -> bool:
    if side == ABOVE:
        return True
    if side == BELOW:
        return False
    raise ValueError(f"side must be {ABOVE!r} or {BELOW!r}, got {side!r}")


def _opposite(side: str) -> str:
    return BELOW if _side_colour(side) else ABOVE


@dataclass(frozen=True)
class Clusters:
    """Cluster labels of one colour on the half-unit grid of a region's bounding box."""

    region: EpsRegion
    labels: np.ndarray
    count: int

    def _at(self, xs, ys) -> np.ndarray:
        r = self.region
        lab = self.labels[np.asarray(xs) - r.x0, np.asarray(ys) - r.y0]
        return np.unique(lab[lab > 0])

    def column(self, x: int, y0: int | None = None, y1: int | None = None) -> np.ndarray:
        """Labels met on the vertical segment ``{x} x [y0, y1]`` (half units)."""
        r = self.region
        y0 = r.y0 if y0 is None else y0
        y1 = r.y1 if y1 is None else y1
        ys = np.arange(y0, y1 + 1)
        return self._at(np.full_like(ys, x), ys)

    def row(self, y: int, x0: int | None = None, x1: int | None = None) -> np.ndarray:
        r = self.region
        x0 = r.x0 if x0 is None else x0
        x1 = r.x1 if x1 is None else x1
        xs = np.arange(x0, x1 + 1)
        return self._at(xs, np.full_like(xs, y))

    def ring(self, radius: int, centre=None) -> np.ndarray:
        """Labels met on the square ring ``max(|x - c|, |y - c|) = radius``."""
        cx, cy = self.region.centre if centre is None else centre
        lo, hi = -radius, radius
        parts = [self.row(cy + lo, cx + lo, cx + hi), self.row(cy + hi, cx + lo, cx + hi),
                 self.column(cx + lo, cy + lo, cy + hi), self.column(cx + hi, cy + lo, cy + hi)]
        return np.unique(np.concatenate(parts))


def _augmented_image(colour: np.ndarray, x0: int, y0: int) -> np.ndarray:
    nx, ny = colour.shape
    px = (x0 + np.arange(nx))[:, None] % 2
    py = (y0 + np.arange(ny))[None, :] % 2
    img = np.where(px == py, colour, False)
    horiz = np.zeros_like(colour)
    horiz[1:-1, :] = colour[:-2, :] & colour[2:, :]
    vert = np.zeros_like(colour)
    vert[:, 1:-1] = colour[:, :-2] & colour[:, 2:]
    img |= (px == 1) & (py == 0) & horiz
    img |= (px == 0) & (py == 1) & vert
    return img


def label_clusters(coloring: Coloring, region: EpsRegion, black: bool = True) -> Clusters:
    """Label the clusters of colour ``black`` using adjacency inside the closed region."""
    coloring.lattice.check_region(region)
    i0, j0 = coloring.index((region.x0, region.y0))
    nx, ny = region.x1 - region.x0 + 1, region.y1 - region.y0 + 1
    sub = coloring.black[i0:i0 + nx, j0:j0 + ny]
    colour = sub if black else ~sub
    img = _augmented_image(colour, region.x0, region.y0)
    if region.kind == ANNULUS:
        img &= region.mask(np.arange(region.x0, region.x1 + 1), np.arange(region.y0, region.y1 + 1))
    labels, count = ndimage.label(img, structure=_EIGHT)
    return Clusters(region, labels, count)


def _need(region: EpsRegion, kind: str):
    if region.kind != kind:
        raise RegionKindError(f"expected a {kind}, got a {region.kind}")


def crossing(coloring: Coloring, rect: EpsRegion, direction: str = LR, side: str = ABOVE) -> bool:
    """Monochromatic path inside ``rect`` joining its left/right (LR) or bottom/top (TB) sides."""
    _need(rect, RECTANGLE)
    cl = label_clusters(coloring, rect, _side_colour(side))
    if direction == LR:
        a, b = cl.column(rect.x0), cl.column(rect.x1)
    elif direction == TB:
        a, b = cl.row(rect.y0), cl.row(rect.y1)
    else:
        raise ValueError(f"direction must be {LR!r} or {TB!r}")
    return bool(np.intersect1d(a, b, assume_unique=True).size)


def duality_holds(coloring: Coloring, rect: EpsRegion) -> bool:
    """Exactly one of: a black left-right crossing, a white top-bottom crossing."""
    return crossing(coloring, rect, LR, ABOVE) != crossing(coloring, rect, TB, BELOW)


def _joins_rings(coloring: Coloring, annulus: EpsRegion, colour: bool) -> bool:
    cl = label_clusters(coloring, annulus, colour)
    inner, outer = cl.ring(annulus.inner), cl.ring(annulus.outer)
    return bool(np.intersect1d(inner, outer, assume_unique=True).size)


def circuit(coloring: Coloring, annulus: EpsRegion, side: str = ABOVE) -> bool:
    """Monochromatic circuit in the annulus separating its inner and outer boundaries.

    On a triangulation such a circuit exists iff no path of the other colour
    joins the two boundaries.
    """
    _need(annulus, ANNULUS)
    return not _joins_rings(coloring, annulus, not _side_colour(side))


def arm(coloring: Coloring, r: float, s: float, side: str = ABOVE, centre=(0.0, 0.0)) -> bool:
    """Monochromatic path in ``[-s, s]^2 \\ ]-r, r[^2`` joining the inner and outer boundaries."""
    if not 0 < r < s:
        raise InvalidRegionError("arm needs 0 < r < s")
    ann = EpsRegion.annulus(s, r, coloring.lattice.eps, centre)
    return _joins_rings(coloring, ann, _side_colour(side))


def arm_profile(coloring: Coloring, r: float, radii, side: str = ABOVE,
                centre=(0.0, 0.0)) -> list[bool]:
    """``arm(r, s)`` for each ``s`` in ``radii`` from one labelling of the largest annulus.

    A lattice path cannot jump over a square ring (its steps move each
    coordinate by at most one lattice vertex), so a path reaching ring ``s``
    inside the larger annulus first does so inside ``[-s, s]^2``.
    """
    eps = coloring.lattice.eps
    radii = list(radii)
    if any(not 0 < r < s for s in radii):
        raise InvalidRegionError("arm needs 0 < r < s")
    ann = EpsRegion.annulus(max(radii), r, eps, centre)
    cl = label_clusters(coloring, ann, _side_colour(side))
    inner = cl.ring(ann.inner)
    return [bool(np.intersect1d(inner, cl.ring(to_half_units(s, eps)), assume_unique=True).size)
            for s in radii]


# -- Tassion events ------------------------------------------------------------

def _tassion_square(coloring: Coloring, s: float, alphas, centre) -> EpsRegion:
    eps = coloring.lattice.eps
    for a in alphas:
        if not 0 <= a <= s / 2 + 1e-12:
            raise InvalidRegionError("need 0 <= alpha <= beta <= s/2")
        to_half_units(a, eps, "alpha")
    return EpsRegion.square(s, eps, centre)


def tassion_H(coloring: Coloring, s: float, alpha: float, beta: float,
              centre=(0.0, 0.0)) -> bool:
    """Black path in the square of side ``s`` from its left side to ``{s/2} x [alpha, beta]``."""
    if alpha > beta:
        raise InvalidRegionError("need alpha <= beta")
    sq = _tassion_square(coloring, s, (alpha, beta), centre)
    eps = coloring.lattice.eps
    cy = (sq.y0 + sq.y1) // 2
    cl = label_clusters(coloring, sq, True)
    target = cl.column(sq.x1, cy + to_half_units(alpha, eps), cy + to_half_units(beta, eps))
    return bool(np.intersect1d(cl.column(sq.x0), target, assume_unique=True).size)


def tassion_X(coloring: Coloring, s: float, alpha: float, centre=(0.0, 0.0)) -> bool:
    """One black cluster of the square touching the four side segments ``{-+s/2} x (+-[alpha, s/2])``."""
    sq = _tassion_square(coloring, s, (alpha,), centre)
    a = to_half_units(alpha, coloring.lattice.eps)
    cy = (sq.y0 + sq.y1) // 2
    cl = label_clusters(coloring, sq, True)
    common = None
    for x in (sq.x0, sq.x1):
        for lo, hi in ((sq.y0, cy - a), (cy + a, sq.y1)):
            labs = cl.column(x, lo, hi)
            common = labs if common is None else np.intersect1d(common, labs, assume_unique=True)
    return bool(common.size)


def tassion_profile(coloring: Coloring, s: float, alphas, centre=(0.0, 0.0)) -> dict:
    """``H(0, a)``, ``H(a, s/2)`` and ``X(a)`` for every ``a`` from one labelling."""
    sq = _tassion_square(coloring, s, alphas, centre)
    eps = coloring.lattice.eps
    cy = (sq.y0 + sq.y1) // 2
    cl = label_clusters(coloring, sq, True)
    left = cl.column(sq.x0)
    out = {"H_low": [], "H_high": [], "X": []}
    for alpha in alphas:
        a = to_half_units(alpha, eps)
        low = cl.column(sq.x1, cy, cy + a)
        high = cl.column(sq.x1, cy + a, sq.y1)
        out["H_low"].append(bool(np.intersect1d(left, low, assume_unique=True).size))
        out["H_high"].append(bool(np.intersect1d(left, high, assume_unique=True).size))
        common = None
        for x in (sq.x0, sq.x1):
            for lo, hi in ((sq.y0, cy - a), (cy + a, sq.y1)):
                labs = cl.column(x, lo, hi)
                common = labs if common is None else np.intersect1d(common, labs, assume_unique=True)
        out["X"].append(bool(common.size))
    return out


@dataclass(frozen=True)
class EventSpec:
    """A named event on a region, evaluated by :meth:`holds`."""

    region: EpsRegion
    kind: str
    side: str = ABOVE
    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        needs = {"LR": RECTANGLE, "TB": RECTANGLE, "circuit": ANNULUS, "arm": ANNULUS,
                 "H": RECTANGLE, "X": RECTANGLE}
        if self.kind not in needs:
            raise ValueError(f"unknown event kind {self.kind!r}")
        _need(self.region, needs[self.kind])
        _side_colour(self.side)
        if self.kind in ("H", "X"):
            r = self.region
            if r.x1 - r.x0 != r.y1 - r.y0:
                raise RegionKindError("Tassion events need a square")
            if not 0 <= self.alpha <= (self.beta if self.kind == "H" else self.alpha):
                raise InvalidRegionError("need 0 <= alpha <= beta")

    def holds(self, coloring: Coloring) -> bool:
        r = self.region
        if self.kind in (LR, TB):
            return crossing(coloring, r, self.kind, self.side)
        if self.kind == "circuit":
            return circuit(coloring, r, self.side)
        if self.kind == "arm":
            return _joins_rings(coloring, r, _side_colour(self.side))
        eps = r.eps
        side = (r.x1 - r.x0) * eps / 2
        centre = ((r.x0 + r.x1) * eps / 4, (r.y0 + r.y1) * eps / 4)
        if self.side != ABOVE:
            raise ValueError("Tassion events are defined for black paths")
        if self.kind == "H":
            return tassion_H(coloring, side, self.alpha, self.beta, centre)
        return tassion_X(coloring, side, self.alpha, centre)


# -- pivotal patterns -----------------------------------------------------------

def _changes(colours, cyclic: bool) -> int:
    c = [bool(x) for x in colours]
    n = sum(c[k] != c[k + 1] for k in range(len(c) - 1))
    if cyclic:
        n += c[-1] != c[0]
    return n


# start index in INTEGER_NEIGHBOURS of the anticlockwise half-plane walk
_SIDE_START = {"bottom": 0, "right": 2, "top": 4, "left": 6}


def _side_of(rect: EpsRegion, v) -> str:
    x, y = v
    if y == rect.y0:
        return "bottom"
    if y == rect.y1:
        return "top"
    if x == rect.x0:
        return "left"
    return "right"


def _half_plane(start: int):
    return [INTEGER_NEIGHBOURS[(start + k) % 8] for k in range(5)]


def pivotal_pattern(coloring: Coloring, v, region: EpsRegion) -> Pattern:
    """Classify the neighbourhood colours of ``v`` (half units) inside a rectangle.

    Interior vertices: ``ALT4_INTERIOR`` when the anticlockwise cycle of
    neighbours changes colour at least four times. Non-corner boundary
    vertices: ``ALT3_BOUNDARY`` when the neighbours in the closed inner
    half-plane, read anticlockwise, change colour at least twice.
    """
    _need(region, RECTANGLE)
    v = (int(v[0]), int(v[1]))
    if not is_vertex(v) or not region.contains(v):
        raise InvalidVertexError(f"{v} is not a lattice vertex of the region")
    coloring.lattice.check_region(region)
    if region.x0 == region.x1 or region.y0 == region.y1:
        raise RegionKindError("degenerate rectangle")
    if region.is_corner(v):
        raise UnsupportedVertexError(f"{v} is a corner of the region")
    if region.on_boundary(v):
        nbrs = _half_plane(_SIDE_START[_side_of(region, v)])
        cols = [coloring.is_black((v[0] + dx, v[1] + dy)) for dx, dy in nbrs]
        return Pattern.ALT3_BOUNDARY if _changes(cols, False) >= 2 else Pattern.NONE
    offsets = INTEGER_NEIGHBOURS if v[0] % 2 == 0 else CENTRE_NEIGHBOURS
    cols = [coloring.is_black((v[0] + dx, v[1] + dy)) for dx, dy in offsets]
    return Pattern.ALT4_INTERIOR if _changes(cols, True) >= 4 else Pattern.NONE


def count_patterns(coloring: Coloring, rect: EpsRegion) -> tuple[int, int]:
    """Numbers of ``ALT4_INTERIOR`` and ``ALT3_BOUNDARY`` vertices of a rectangle."""
    at_integer, at_centre, alt3 = count_patterns_by_type(coloring, rect)
    return at_integer + at_centre, alt3


def count_patterns_by_type(coloring: Coloring, rect: EpsRegion) -> tuple[int, int, int]:
    """``ALT4_INTERIOR`` counts at integer vertices and at face centres, then ``ALT3_BOUNDARY``."""
    _need(rect, RECTANGLE)
    coloring.lattice.check_region(rect)
    i0, j0 = coloring.index((rect.x0, rect.y0))
    nx, ny = rect.x1 - rect.x0 + 1, rect.y1 - rect.y0 + 1
    if nx < 3 or ny < 3:
        raise RegionKindError("degenerate rectangle")
    b = np.pad(coloring.black[i0:i0 + nx, j0:j0 + ny], 2)

    def shifted(dx, dy):
        return b[2 + dx:2 + dx + nx, 2 + dy:2 + dy + ny]

    def changes(offsets, cyclic):
        cols = [shifted(dx, dy) for dx, dy in offsets]
        n = np.zeros((nx, ny), dtype=np.int8)
        for k in range(len(cols) - 1):
            n += cols[k] != cols[k + 1]
        if cyclic:
            n += cols[-1] != cols[0]
        return n

    xs = rect.x0 + np.arange(nx)
    ys = rect.y0 + np.arange(ny)
    px, py = xs[:, None] % 2, ys[None, :] % 2
    interior = np.zeros((nx, ny), dtype=bool)
    interior[1:-1, 1:-1] = True
    integer = (px == 0) & (py == 0)
    centre = (px == 1) & (py == 1)
    at_integer = int((integer & interior & (changes(INTEGER_NEIGHBOURS, True) >= 4)).sum())
    at_centre = int((centre & interior & (changes(CENTRE_NEIGHBOURS, True) >= 4)).sum())

    alt3 = 0
    edge = {"bottom": (slice(2, -2, 2), 0), "top": (slice(2, -2, 2), -1),
            "left": (0, slice(2, -2, 2)), "right": (-1, slice(2, -2, 2))}
    for name, idx in edge.items():
        n = changes(_half_plane(_SIDE_START[name]), False)
        alt3 += int((n[idx] >= 2).sum())
    return at_integer, at_centre, int(alt3)
