"""Exact synthesis of stationary Gaussian fields on grid windows.

Fields are drawn by circulant embedding: the covariance restricted to the
window is embedded in a periodic torus, diagonalised by a 2-D FFT and coloured
with independent complex normals. The real and imaginary parts of one complex
draw are two independent fields, so replicas ``2b`` and ``2b + 1`` share the
transform of block ``b``.

Randomness comes from Philox streams keyed by ``(seed, block, stream_tag)``;
each replica is a pure function of ``(kernel, grid, seed, replica)``.
"""
from __future__ import annotations

import functools
import math
import struct
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np
import scipy.fft as sfft

from .kernels import Kernel, covariance

PADDING_FACTORS = (2, 4, 8, 16)
CLAMP_TOL = 1e-8

STREAM_FIELD = 0
STREAM_G1 = 1
STREAM_G2 = 2
STREAM_LINE = 3

DUMP_MAGIC = b"NRSW"
DUMP_VERSION = 1
_HEADER = struct.Struct("<4sIdddII")


class EmbeddingError(RuntimeError):
    pass


class InvalidRegionError(ValueError):
    pass


class ShapeError(ValueError):
    pass


def substream(seed: int, block: int, tag: int) -> np.random.Generator:
    """Counter-based generator for one (seed, block, tag) triple."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(block), int(tag)))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class GridSpec:
    """Regular grid ``origin + spacing * (i, j)`` with ``extent = (nx, ny)`` points."""

    spacing: float
    origin: tuple[float, float]
    extent: tuple[int, int]

    def __post_init__(self):
        if not self.spacing > 0:
            raise ValueError("spacing must be positive")
        nx, ny = self.extent
        if nx < 2 or ny < 2:
            raise ValueError("grid extent must be at least 2 x 2")
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))
        object.__setattr__(self, "extent", (int(nx), int(ny)))

    @classmethod
    def covering(cls, xmin: float, xmax: float, ymin: float, ymax: float,
                 spacing: float) -> "GridSpec":
        """Smallest grid with nodes on ``spacing * Z^2`` covering the box."""
        i0 = math.floor(xmin / spacing + 1e-9)
        i1 = math.ceil(xmax / spacing - 1e-9)
        j0 = math.floor(ymin / spacing + 1e-9)
        j1 = math.ceil(ymax / spacing - 1e-9)
        return cls(spacing, (i0 * spacing, j0 * spacing), (i1 - i0 + 1, j1 - j0 + 1))

    @property
    def index_origin(self) -> tuple[int, int]:
        """Origin in integer units of ``spacing``."""
        return (round(self.origin[0] / self.spacing), round(self.origin[1] / self.spacing))

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        (x0, y0), (nx, ny), h = self.origin, self.extent, self.spacing
        return x0, x0 + (nx - 1) * h, y0, y0 + (ny - 1) * h

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        (x0, y0), (nx, ny), h = self.origin, self.extent, self.spacing
        return x0 + h * np.arange(nx), y0 + h * np.arange(ny)

    def points(self) -> np.ndarray:
        xs, ys = self.axes()
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        return np.stack([gx, gy], axis=-1)

    def overlaps(self, other: "GridSpec") -> bool:
        a, b = self.bounds, other.bounds
        return not (a[1] < b[0] or b[1] < a[0] or a[3] < b[2] or b[3] < a[2])

    def union(self, other: "GridSpec") -> "GridSpec":
        if not math.isclose(self.spacing, other.spacing):
            raise ShapeError("grids have different spacings")
        a, b = self.bounds, other.bounds
        return GridSpec.covering(min(a[0], b[0]), max(a[1], b[1]),
                                 min(a[2], b[2]), max(a[3], b[3]), self.spacing)

    def offset_in(self, outer: "GridSpec") -> tuple[int, int]:
        """Index of this grid's origin inside ``outer``."""
        (i0, j0), (k0, l0) = self.index_origin, outer.index_origin
        return i0 - k0, j0 - l0


@dataclass(frozen=True)
class FieldSample:
    grid: GridSpec
    values: np.ndarray = field(repr=False)
    seed_trace: tuple[int, int] = (0, 0)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != self.grid.extent:
            raise ShapeError(f"values shape {vals.shape} does not match grid {self.grid.extent}")
        if not np.isfinite(vals).all():
            raise ValueError("field values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def restrict(self, sub: GridSpec) -> "FieldSample":
        i, j = sub.offset_in(self.grid)
        nx, ny = sub.extent
        if i < 0 or j < 0 or i + nx > self.grid.extent[0] or j + ny > self.grid.extent[1]:
            raise InvalidRegionError("sub-grid is not contained in the sample window")
        return FieldSample(sub, self.values[i:i + nx, j:j + ny], self.seed_trace)


def field_from_function(func, grid: GridSpec) -> FieldSample:
    """Deterministic 'sample' ``func(x, y)`` on a grid, for synthetic level sets."""
    xs, ys = grid.axes()
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    return FieldSample(grid, np.asarray(func(gx, gy), dtype=float), (-1, -1))


# -- circulant embedding -----------------------------------------------------

@dataclass(frozen=True)
class Embedding:
    shape: tuple[int, ...]
    window: tuple[int, ...]
    scale: np.ndarray = field(repr=False)   # sqrt(eigenvalues / size)
    padding: int
    clamped: float                          # most negative eigenvalue set to zero


def _torus_lags(m: int, h: float) -> np.ndarray:
    k = np.arange(m)
    return np.where(k <= m // 2, k, k - m) * h


def _embedding_from_cov(cov_fn, window: tuple[int, ...], h: float) -> Embedding:
    worst = None
    for factor in PADDING_FACTORS:
        shape = tuple(sfft.next_fast_len(max(factor * n, 2 * (n - 1))) for n in window)
        lags = [_torus_lags(m, h) for m in shape]
        c = cov_fn(*np.meshgrid(*lags, indexing="ij", sparse=True))
        lam = sfft.fftn(c).real
        top = lam.max()
        low = lam.min()
        if low >= -CLAMP_TOL * top:
            lam = np.maximum(lam, 0.0)
            scale = np.sqrt(lam / lam.size)
            scale.setflags(write=False)
            return Embedding(shape, window, scale, factor, min(low, 0.0))
        worst = low
    raise EmbeddingError(
        f"circulant embedding not positive semidefinite up to {PADDING_FACTORS[-1]}x "
        f"padding; most negative eigenvalue {worst:.4e}")


@functools.lru_cache(maxsize=32)
def embedding(kernel: Kernel, spacing: float, extent: tuple[int, int]) -> Embedding:
    return _embedding_from_cov(lambda x, y: covariance(kernel, x, y), tuple(extent), spacing)


@functools.lru_cache(maxsize=8)
def line_embedding(kernel: Kernel, direction: tuple[float, float], spacing: float,
                   n: int) -> Embedding:
    ux, uy = direction
    return _embedding_from_cov(lambda t: covariance(kernel, t * ux, t * uy), (n,), spacing)


def _block(emb: Embedding, seed: int, block: int, tag: int, workers: int = 1) -> np.ndarray:
    """Two independent fields (real, imaginary) restricted to the window."""
    rng = substream(seed, block, tag)
    z = rng.standard_normal((2,) + emb.shape)
    w = sfft.fftn(emb.scale * (z[0] + 1j * z[1]), workers=workers)
    sl = tuple(slice(0, n) for n in emb.window)
    w = w[sl]
    return np.stack([w.real, w.imag])


def sample_fields(kernel: Kernel, grid: GridSpec, seed: int, replicas: Iterable[int],
                  stream: int = STREAM_FIELD) -> Iterator[FieldSample]:
    """Samples for the given replica indices, reusing each shared block once."""
    emb = embedding(kernel, grid.spacing, grid.extent)
    cached_block, pair = None, None
    for r in replicas:
        b = r // 2
        if b != cached_block:
            pair = _block(emb, seed, b, stream)
            cached_block = b
        yield FieldSample(grid, pair[r % 2], (int(seed), int(r)))


def sample_field(kernel: Kernel, grid: GridSpec, seed: int, replica: int,
                 stream: int = STREAM_FIELD) -> FieldSample:
    """One draw of the centred stationary field with covariance ``kernel`` on ``grid``."""
    return next(sample_fields(kernel, grid, seed, [replica], stream))


def sample_independent_pair(kernel: Kernel, grid1: GridSpec, grid2: GridSpec, seed: int,
                            replica: int) -> tuple[FieldSample, FieldSample]:
    """Independent draws on two disjoint windows (the field ``g``)."""
    if grid1.overlaps(grid2):
        raise InvalidRegionError("windows overlap")
    return (sample_field(kernel, grid1, seed, replica, STREAM_G1),
            sample_field(kernel, grid2, seed, replica, STREAM_G2))


def sample_interpolated(kernel: Kernel, grid1: GridSpec, grid2: GridSpec, t: float,
                        seed: int, replica: int) -> tuple[FieldSample, FieldSample]:
    """``sqrt(t) f + sqrt(1 - t) g`` on both windows.

    ``f`` is one draw over the union window and ``g`` an independent pair, so the
    cross-window covariance is ``t * kappa`` while each window keeps ``kappa``.
    """
    if not 0.0 <= t <= 1.0:
        raise ValueError("t must lie in [0, 1]")
    g1, g2 = sample_independent_pair(kernel, grid1, grid2, seed, replica)
    big = grid1.union(grid2)
    f = sample_field(kernel, big, seed, replica, STREAM_FIELD)
    f1, f2 = f.restrict(grid1), f.restrict(grid2)
    a, b = math.sqrt(t), math.sqrt(1.0 - t)
    trace = (int(seed), int(replica))
    if t == 1.0:
        return FieldSample(grid1, f1.values, trace), FieldSample(grid2, f2.values, trace)
    if t == 0.0:
        return FieldSample(grid1, g1.values, trace), FieldSample(grid2, g2.values, trace)
    return (FieldSample(grid1, a * f1.values + b * g1.values, trace),
            FieldSample(grid2, a * f2.values + b * g2.values, trace))


def sample_line(kernel: Kernel, direction: Sequence[float], spacing: float, n: int,
                seed: int, replica: int) -> np.ndarray:
    """The field restricted to ``n`` points ``t * direction`` with ``t = spacing * k``."""
    u = np.asarray(direction, dtype=float)
    u = tuple(float(v) for v in u / np.linalg.norm(u))
    emb = line_embedding(kernel, u, float(spacing), int(n))
    return _block(emb, seed, replica // 2, STREAM_LINE)[replica % 2]


def sample_lines(kernel: Kernel, direction: Sequence[float], spacing: float, n: int,
                 seed: int, replicas: Iterable[int]) -> Iterator[np.ndarray]:
    u = np.asarray(direction, dtype=float)
    u = tuple(float(v) for v in u / np.linalg.norm(u))
    emb = line_embedding(kernel, u, float(spacing), int(n))
    cached_block, pair = None, None
    for r in replicas:
        if r // 2 != cached_block:
            cached_block = r // 2
            pair = _block(emb, seed, cached_block, STREAM_LINE)
        yield pair[r % 2]


# -- validation helpers ------------------------------------------------------

@dataclass(frozen=True)
class CovarianceEstimate:
    lag: tuple[int, int]
    estimate: float
    stderr: float
    n: int


def empirical_covariance(samples: Sequence[FieldSample],
                         lags: Iterable[tuple[int, int]]) -> list[CovarianceEstimate]:
    """Mean of ``f(x) f(x + lag)`` over window positions and replicas.

    The field is centred, so no mean is subtracted. Standard errors come from the
    spread of the per-replica spatial averages.
    """
    samples = list(samples)
    if len(samples) < 2:
        raise ValueError("need at least two samples")
    grid = samples[0].grid
    for s in samples[1:]:
        if s.grid.extent != grid.extent or not math.isclose(s.grid.spacing, grid.spacing):
            raise ShapeError("samples have mismatched grids")
    stack = np.stack([s.values for s in samples])
    nx, ny = grid.extent
    out = []
    for lag in lags:
        dx, dy = int(lag[0]), int(lag[1])
        if abs(dx) >= nx or abs(dy) >= ny:
            raise InvalidRegionError(f"lag {lag} does not fit in a {nx} x {ny} window")
        a = stack[:, max(0, -dx):nx - max(0, dx), max(0, -dy):ny - max(0, dy)]
        b = stack[:, max(0, dx):nx - max(0, -dx), max(0, dy):ny - max(0, -dy)]
        per = (a * b).mean(axis=(1, 2))
        n = len(per)
        out.append(CovarianceEstimate((dx, dy), float(per.mean()),
                                      float(per.std(ddof=1) / math.sqrt(n)), n))
    return out


# -- binary dump -------------------------------------------------------------

def dump_field(sample: FieldSample) -> bytes:
    g = sample.grid
    head = _HEADER.pack(DUMP_MAGIC, DUMP_VERSION, g.spacing, g.origin[0], g.origin[1],
                        g.extent[0], g.extent[1])
    return head + np.ascontiguousarray(sample.values, dtype="<f8").tobytes(order="C")


def load_field(data: bytes) -> FieldSample:
    if len(data) < _HEADER.size:
        raise ShapeError("truncated field dump")
    magic, version, h, x0, y0, nx, ny = _HEADER.unpack_from(data)
    if magic != DUMP_MAGIC:
        raise ValueError("not a field dump (bad magic)")
    if version != DUMP_VERSION:
        raise ValueError(f"unsupported dump version {version}")
    body = data[_HEADER.size:]
    if len(body) != 8 * nx * ny:
        raise ShapeError("payload length does not match header")
    vals = np.frombuffer(body, dtype="<f8").reshape(nx, ny).astype(float)
    return FieldSample(GridSpec(h, (x0, y0), (nx, ny)), vals, (-1, -1))


def save_field(sample: FieldSample, path) -> None:
    with open(path, "wb") as fh:
        fh.write(dump_field(sample))


def read_field(path) -> FieldSample:
    with open(path, "rb") as fh:
        return load_field(fh.read())
