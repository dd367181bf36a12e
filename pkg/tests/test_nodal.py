import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gfperc.kernels import Kernel
from gfperc.lattice import EpsRegion, color_field
from gfperc.nodal import count_components, trace_nodal
from gfperc.sampler import FieldSample, GridSpec, InvalidRegionError, field_from_function, sample_field


def circle(cx=0.0, cy=0.0, r=1.0):
    return lambda x, y: (x - cx) ** 2 + (y - cy) ** 2 - r * r


def window(eps, half=3.0):
    return GridSpec.covering(-half, half, -half, half, eps / 2)


@pytest.mark.parametrize("eps", [0.2, 0.1, 0.05])
def test_unit_circle_is_one_closed_component(eps):
    curves = trace_nodal(field_from_function(circle(), window(eps)), eps)
    assert curves.n_components == 1 and curves.closed.all()
    assert count_components(curves, EpsRegion.square(4, eps)) == 1
    assert count_components(curves, EpsRegion.rectangle(0, 2, 0, 2, eps)) == 0


@pytest.mark.parametrize("eps", [0.2, 0.1, 0.05])
def test_two_circles(eps):
    f = lambda x, y: np.minimum(circle(-1.4, 0, 0.8)(x, y), circle(1.4, 0, 0.8)(x, y))
    curves = trace_nodal(field_from_function(f, window(eps, 3.5)), eps)
    assert count_components(curves, EpsRegion.square(6, eps)) == 2


def test_constant_field_has_no_curves():
    g = window(0.2)
    curves = trace_nodal(FieldSample(g, np.ones(g.extent)), 0.2)
    assert curves.n_components == 0
    assert count_components(curves, EpsRegion.square(4, 0.2)) == 0


def test_single_bicoloured_triangle_gives_one_segment():
    # 3x3 half-unit grid: one square, only the bottom-left corner white
    vals = np.ones((3, 3))
    vals[0, 0] = -1.0
    curves = trace_nodal(FieldSample(GridSpec(0.5, (0, 0), (3, 3)), vals), 1.0)
    assert len(curves.segments) == 2      # the two triangles meeting at that corner
    assert len(set(curves.faces.tolist())) == len(curves.faces)


def test_exiting_curves_never_count():
    f = lambda x, y: x - 0.05
    curves = trace_nodal(field_from_function(f, window(0.2)), 0.2)
    assert curves.n_components == 1 and not curves.closed.any()
    assert count_components(curves, EpsRegion.square(4, 0.2)) == 0


def test_margin_is_enforced():
    curves = trace_nodal(field_from_function(circle(), window(0.2)), 0.2)
    with pytest.raises(InvalidRegionError):
        count_components(curves, EpsRegion.square(6, 0.2))


@given(st.integers(0, 10_000), st.floats(-1, 1))
def test_every_face_has_zero_or_two_bicoloured_edges(seed, p):
    eps = 0.5
    f = sample_field(Kernel.bargmann_fock(), window(eps, 2.0), 11, seed)
    curves = trace_nodal(f, eps, p)
    # one segment per face, each midpoint shared by at most two segments
    assert len(set(curves.faces.tolist())) == len(curves.faces)
    deg = np.bincount(curves.segments.ravel(), minlength=len(curves.midpoints))
    assert deg.max(initial=0) <= 2
    # closed components: every midpoint has degree two
    for k in np.flatnonzero(curves.closed):
        assert (deg[curves.labels == k] == 2).all()
    # midpoints separate the two colours: each lies between a black and a white vertex
    col = color_field(f, eps, p)
    assert col.black.any() or curves.n_components == 0


@given(st.floats(0.6, 1.6), st.floats(-0.5, 0.5), st.floats(-0.5, 0.5))
def test_component_count_stable_under_refinement(r, cx, cy):
    counts = set()
    for eps in (0.2, 0.1, 0.05):
        curves = trace_nodal(field_from_function(circle(cx, cy, r), window(eps, 3.5)), eps)
        counts.add(count_components(curves, EpsRegion.square(6, eps)))
    assert counts == {1}


def test_json_export():
    curves = trace_nodal(field_from_function(circle(), window(0.2)), 0.2)
    data = json.loads(curves.to_json())
    comp = data["components"][0]
    assert comp["closed"] and comp["points"][0] == comp["points"][-1]
    pts = np.array(comp["points"])
    assert np.allclose(np.hypot(pts[:, 0], pts[:, 1]), 1.0, atol=0.75 * 0.2)
