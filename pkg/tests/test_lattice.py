import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gfperc.lattice import (Coloring, EpsRegion, FccLattice, InvalidVertexError, color_field,
                            is_vertex, to_half_units)
from gfperc.sampler import FieldSample, GridSpec, InvalidRegionError, ShapeError

EPS = 0.5
LAT = FccLattice(EPS, (-8, 8, -8, 8))


def test_vertex_counts():
    assert len(LAT.vertices_in(EpsRegion.rectangle(0, EPS, 0, EPS, EPS))) == 5
    assert len(LAT.vertices_in(EpsRegion.rectangle(0, 2 * EPS, 0, EPS, EPS))) == 8
    assert len(LAT.vertices_in(EpsRegion.rectangle(0, 0, 0, 0, EPS))) == 1


def test_vertices_are_lexicographic():
    v = LAT.vertices_in(EpsRegion.rectangle(-1, 1, -0.5, 1.5, EPS))
    assert [tuple(r) for r in v] == sorted(tuple(r) for r in v)
    assert all(is_vertex(r) for r in v)


def test_region_outside_window():
    with pytest.raises(InvalidRegionError):
        LAT.vertices_in(EpsRegion.rectangle(0, 5, 0, 1, EPS))
    with pytest.raises(InvalidRegionError):
        EpsRegion.rectangle(0, 0.3, 0, 1, EPS)


def test_neighbour_counts():
    assert len(LAT.neighbors((1, 1))) == 4
    assert len(LAT.neighbors((0, 0))) == 8
    assert len(LAT.neighbors((8, 0))) == 5
    assert len(LAT.neighbors((8, 8))) == 3
    with pytest.raises(InvalidVertexError):
        LAT.neighbors((1, 0))


@given(st.integers(-8, 8), st.integers(-8, 8))
def test_neighbour_symmetry(x, y):
    if not is_vertex((x, y)):
        return
    for u in LAT.neighbors((x, y)):
        assert (x, y) in LAT.neighbors(u)


def test_every_face_is_a_triangle():
    # faces of the planar graph on a small window, found by walking the rotation system
    lat = FccLattice(1.0, (0, 4, 0, 4))
    verts = [(x, y) for x in range(5) for y in range(5) if is_vertex((x, y))]
    nbrs = {v: sorted(lat.neighbors(v), key=lambda u: np.arctan2(u[1] - v[1], u[0] - v[0]))
            for v in verts}
    seen, sizes = set(), []
    for v in verts:
        for u in nbrs[v]:
            if (v, u) in seen:
                continue
            face, a, b = [], v, u
            while (a, b) not in seen:
                seen.add((a, b))
                face.append(a)
                ring = nbrs[b]
                k = ring.index(a)
                a, b = b, ring[(k - 1) % len(ring)]
            sizes.append(len(face))
    # one outer face, all bounded faces are triangles
    assert sorted(sizes)[:-1] == [3] * (len(sizes) - 1)
    assert sizes.count(3) == 4 * 2 * 2


def test_region_boundaries_are_lattice_edges():
    for reg in (EpsRegion.rectangle(-1, 1.5, -0.5, 2, EPS), EpsRegion.annulus(2, 1, EPS)):
        x0, x1, y0, y1 = reg.bbox
        ring = [(x, y0) for x in range(x0, x1 + 1)] + [(x0, y) for y in range(y0, y1 + 1)]
        verts = [v for v in ring if is_vertex(v)]
        # consecutive boundary vertices are 2 half units apart along an axis: an axis edge
        assert all(v[0] % 2 == 0 and v[1] % 2 == 0 for v in verts)


def test_color_field_weak_inequality_and_extremes():
    g = GridSpec(0.25, (0, 0), (5, 5))
    vals = np.linspace(-2, 2, 25).reshape(5, 5)
    vals[2, 2] = -0.5
    f = FieldSample(g, vals)
    col = color_field(f, 0.5, 0.5)
    assert col.is_black((2, 2))
    assert color_field(f, 0.5, 10.0).black.all()
    assert not color_field(f, 0.5, -10.0).black.any()
    with pytest.raises(ShapeError):
        color_field(f, 0.25, 0.0)


def test_coloring_vertex_count_and_flip():
    col = Coloring.from_array(np.zeros((5, 5), bool), EPS)
    assert col.vertex_count == 13
    flipped = col.with_flipped((2, 2))
    assert flipped.is_black((2, 2)) and not col.is_black((2, 2))
    with pytest.raises(InvalidVertexError):
        col.is_black((1, 2))


def test_annulus_membership():
    ann = EpsRegion.annulus(2, 1, EPS)
    assert ann.contains((4, 0)) and ann.contains((5, 5))
    assert not ann.contains((0, 0)) and not ann.contains((3, 1))
    assert ann.on_boundary((4, 2)) and ann.on_boundary((8, 8)) and not ann.on_boundary((6, 0))
    with pytest.raises(InvalidRegionError):
        EpsRegion.annulus(1, 2, EPS)


@given(st.integers(-50, 50), st.sampled_from([0.1, 0.25, 0.2, 1.0]))
def test_half_units_exact(k, eps):
    assert to_half_units(k * eps, eps) == 2 * k
