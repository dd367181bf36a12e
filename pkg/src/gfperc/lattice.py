"""Face-centred square lattice, eps-drawn regions and level colourings.

All combinatorics use integer coordinates in units of ``eps / 2`` ("half
units"). Integer vertices of the lattice have both coordinates even, face
centres have both odd, so the vertex set is ``{(I, J) : I + J even}``.
Integer vertices are joined along the axes (offset 2) and to the four
adjacent face centres (offset (+-1, +-1)); face centres only have the latter.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .sampler import FieldSample, GridSpec, InvalidRegionError, ShapeError

RECTANGLE = "rectangle"
ANNULUS = "annulus"

INTEGER_NEIGHBOURS = ((2, 0), (1, 1), (0, 2), (-1, 1), (-2, 0), (-1, -1), (0, -2), (1, -1))
CENTRE_NEIGHBOURS = ((1, 1), (-1, 1), (-1, -1), (1, -1))


class InvalidVertexError(ValueError):
    pass


def to_half_units(value: float, eps: float, what: str = "value") -> int:
    """``2 * value / eps`` as an exact integer multiple of 2."""
    q = value / eps
    k = round(q)
    if not math.isclose(q, k, rel_tol=0, abs_tol=1e-9):
        raise InvalidRegionError(f"{what}={value} is not a multiple of eps={eps}")
    return 2 * k


def is_vertex(v) -> bool:
    return (v[0] + v[1]) % 2 == 0


@dataclass(frozen=True)
class EpsRegion:
    """A closed eps-drawn rectangle or square annulus, stored in half units.

    Rectangles are ``[x0, x1] x [y0, y1]``. Annuli are
    ``centre + [-outer, outer]^2`` minus the open square ``centre + ]-inner, inner[^2``.
    """

    kind: str
    eps: float
    x0: int = 0
    x1: int = 0
    y0: int = 0
    y1: int = 0
    centre: tuple[int, int] = (0, 0)
    outer: int = 0
    inner: int = 0

    @classmethod
    def rectangle(cls, a: float, b: float, c: float, d: float, eps: float) -> "EpsRegion":
        x0, x1 = to_half_units(a, eps, "a"), to_half_units(b, eps, "b")
        y0, y1 = to_half_units(c, eps, "c"), to_half_units(d, eps, "d")
        if x0 > x1 or y0 > y1:
            raise InvalidRegionError("rectangle needs a <= b and c <= d")
        return cls(RECTANGLE, eps, x0, x1, y0, y1)

    @classmethod
    def square(cls, side: float, eps: float, centre=(0.0, 0.0)) -> "EpsRegion":
        h = side / 2
        return cls.rectangle(centre[0] - h, centre[0] + h, centre[1] - h, centre[1] + h, eps)

    @classmethod
    def annulus(cls, outer: float, inner: float, eps: float, centre=(0.0, 0.0)) -> "EpsRegion":
        a, b = to_half_units(outer, eps, "outer"), to_half_units(inner, eps, "inner")
        cx, cy = to_half_units(centre[0], eps, "centre"), to_half_units(centre[1], eps, "centre")
        if not 0 < b <= a:
            raise InvalidRegionError("annulus needs 0 < inner <= outer")
        return cls(ANNULUS, eps, cx - a, cx + a, cy - a, cy + a, (cx, cy), a, b)

    @property
    def bbox(self) -> tuple[int, int, int, int]:
        return self.x0, self.x1, self.y0, self.y1

    def contains(self, v) -> bool:
        x, y = v
        if not (self.x0 <= x <= self.x1 and self.y0 <= y <= self.y1):
            return False
        if self.kind == ANNULUS:
            cx, cy = self.centre
            return max(abs(x - cx), abs(y - cy)) >= self.inner
        return True

    def on_boundary(self, v) -> bool:
        if not self.contains(v):
            return False
        x, y = v
        if x in (self.x0, self.x1) or y in (self.y0, self.y1):
            return True
        if self.kind == ANNULUS:
            cx, cy = self.centre
            return max(abs(x - cx), abs(y - cy)) == self.inner
        return False

    def is_corner(self, v) -> bool:
        return self.kind == RECTANGLE and v[0] in (self.x0, self.x1) and v[1] in (self.y0, self.y1)

    def mask(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """Membership on the half-unit grid ``xs x ys`` (before the vertex-parity filter)."""
        gx, gy = np.meshgrid(xs, ys, indexing="ij", sparse=True)
        m = (gx >= self.x0) & (gx <= self.x1) & (gy >= self.y0) & (gy <= self.y1)
        if self.kind == ANNULUS:
            cx, cy = self.centre
            m &= np.maximum(np.abs(gx - cx), np.abs(gy - cy)) >= self.inner
        return m

    def to_points(self) -> tuple[float, float, float, float]:
        h = self.eps / 2
        return self.x0 * h, self.x1 * h, self.y0 * h, self.y1 * h


@dataclass(frozen=True)
class FccLattice:
    """The lattice at mesh ``eps`` restricted to the window ``[x0, x1] x [y0, y1]`` (half units)."""

    eps: float
    window: tuple[int, int, int, int]

    @classmethod
    def for_grid(cls, grid: GridSpec, eps: float) -> "FccLattice":
        if not math.isclose(eps, 2 * grid.spacing, rel_tol=1e-12):
            raise ShapeError(f"mesh {eps} is not twice the grid spacing {grid.spacing}")
        i0, j0 = grid.index_origin
        nx, ny = grid.extent
        return cls(eps, (i0, i0 + nx - 1, j0, j0 + ny - 1))

    def in_window(self, v) -> bool:
        x0, x1, y0, y1 = self.window
        return x0 <= v[0] <= x1 and y0 <= v[1] <= y1

    def check_region(self, region: EpsRegion) -> None:
        if not math.isclose(region.eps, self.eps, rel_tol=1e-12):
            raise InvalidRegionError("region and lattice have different meshes")
        x0, x1, y0, y1 = self.window
        if region.x0 < x0 or region.x1 > x1 or region.y0 < y0 or region.y1 > y1:
            raise InvalidRegionError("region exceeds the lattice window")

    def point(self, v) -> tuple[float, float]:
        h = self.eps / 2
        return v[0] * h, v[1] * h

    def vertices_in(self, region: EpsRegion) -> np.ndarray:
        """Vertices of the closed region as an ``(m, 2)`` half-unit array, lexicographic."""
        self.check_region(region)
        xs = np.arange(region.x0, region.x1 + 1)
        ys = np.arange(region.y0, region.y1 + 1)
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        keep = region.mask(xs, ys) & ((gx + gy) % 2 == 0)
        return np.stack([gx[keep], gy[keep]], axis=1)

    def neighbors(self, v) -> list[tuple[int, int]]:
        v = (int(v[0]), int(v[1]))
        if not is_vertex(v) or not self.in_window(v):
            raise InvalidVertexError(f"{v} is not a lattice vertex of the window")
        offsets = INTEGER_NEIGHBOURS if v[0] % 2 == 0 else CENTRE_NEIGHBOURS
        out = [(v[0] + dx, v[1] + dy) for dx, dy in offsets]
        return [u for u in out if self.in_window(u)]


@dataclass(frozen=True)
class Coloring:
    """Black/white colouring of the lattice vertices at level ``p``.

    ``black`` is indexed like the underlying grid; entries at non-vertex grid
    points carry the field sign too but are never read as vertices.
    """

    lattice: FccLattice
    level: float
    black: np.ndarray = field(repr=False)

    def __post_init__(self):
        b = np.asarray(self.black, dtype=bool)
        x0, x1, y0, y1 = self.lattice.window
        if b.shape != (x1 - x0 + 1, y1 - y0 + 1):
            raise ShapeError("colour array does not match the lattice window")
        b.setflags(write=False)
        object.__setattr__(self, "black", b)

    @classmethod
    def from_array(cls, black: np.ndarray, eps: float, origin=(0, 0), level: float = 0.0):
        """Colouring from a boolean array whose ``[0, 0]`` entry sits at half-unit ``origin``."""
        black = np.asarray(black, dtype=bool)
        nx, ny = black.shape
        lat = FccLattice(eps, (origin[0], origin[0] + nx - 1, origin[1], origin[1] + ny - 1))
        return cls(lat, level, black)

    def index(self, v) -> tuple[int, int]:
        return v[0] - self.lattice.window[0], v[1] - self.lattice.window[2]

    def is_black(self, v) -> bool:
        if not is_vertex(v) or not self.lattice.in_window(v):
            raise InvalidVertexError(f"{v} is not a lattice vertex of the window")
        return bool(self.black[self.index(v)])

    def vertex_mask(self) -> np.ndarray:
        x0, x1, y0, y1 = self.lattice.window
        xs, ys = np.arange(x0, x1 + 1), np.arange(y0, y1 + 1)
        return (xs[:, None] + ys[None, :]) % 2 == 0

    @property
    def vertex_count(self) -> int:
        return int(self.vertex_mask().sum())

    def with_flipped(self, v) -> "Coloring":
        b = self.black.copy()
        b[self.index(v)] ^= True
        return Coloring(self.lattice, self.level, b)


def color_field(sample: FieldSample, eps: float, p: float) -> Coloring:
    """Colour vertex ``x`` black iff ``f(x) >= -p``."""
    lat = FccLattice.for_grid(sample.grid, eps)
    return Coloring(lat, float(p), sample.values >= -p)
