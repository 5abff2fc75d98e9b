import numpy as np
import pytest

from horofill.geometry import (
    VPolytope,
    affine_span,
    angle_between,
    enumerate_vertices,
    polyline_length,
    segment_hits_polytope,
    unit,
)


def test_unit_rejects_zero():
    with pytest.raises(ValueError):
        unit(np.zeros(3))


def test_affine_span_dims():
    pts = np.array([[0.0, 0, 0], [1, 0, 0], [0, 1, 0]])
    origin, basis = affine_span(pts)
    assert basis.shape == (2, 3)
    _, b1 = affine_span(pts[:1])
    assert b1.shape == (0, 3)


def test_vpolytope_segment_nearest():
    seg = VPolytope([[0.0, 0, 0], [1.0, 0, 0]])
    assert seg.dim == 1 and seg.codim == 2
    x0 = seg.nearest_point([2.0, 1.0, 0.0])
    assert np.allclose(x0, [1.0, 0, 0], atol=1e-12)
    assert abs(np.linalg.norm(np.array([2.0, 1.0, 0.0]) - x0) - np.sqrt(2)) < 1e-12


def test_vpolytope_point_nearest():
    pt = VPolytope([[0.0, 0, 0]])
    x0 = pt.nearest_point([3.0, 4.0, 0.0])
    assert np.allclose(x0, 0.0)


def test_vpolytope_inside_is_fixed():
    sq = VPolytope([[0.0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]])
    x = np.array([0.25, 0.5, 0.0])
    assert np.allclose(sq.nearest_point(x), x, atol=1e-12)
    assert sq.contains(x)
    assert not sq.contains([0.5, 0.5, 0.2])


def test_nearest_point_idempotent_and_lipschitz():
    rng = np.random.default_rng(0)
    sq = VPolytope([[0.0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]])
    for _ in range(100):
        x = rng.normal(size=3) * 3
        y = rng.normal(size=3) * 3
        px, py = sq.nearest_point(x), sq.nearest_point(y)
        assert np.linalg.norm(sq.nearest_point(px) - px) < 1e-9
        assert np.linalg.norm(px - py) <= np.linalg.norm(x - y) + 1e-9


def test_nearest_point_matches_sampling():
    rng = np.random.default_rng(1)
    tri = VPolytope([[0.0, 0, 0], [1, 0, 0.5], [0, 1, 0.25]])
    w = rng.dirichlet(np.ones(3), size=4000)
    cloud = w @ tri.vertices
    for _ in range(20):
        x = rng.normal(size=3) * 2
        d_exact = np.linalg.norm(x - tri.nearest_point(x))
        d_samp = np.min(np.linalg.norm(cloud - x, axis=1))
        assert d_exact <= d_samp + 1e-9
        assert d_exact >= d_samp - 0.05


def test_segment_hits_polytope():
    sq = VPolytope([[0.0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]])
    assert segment_hits_polytope([0.5, 0.5, -1], [0.5, 0.5, 1], sq)
    assert not segment_hits_polytope([2.0, 2.0, -1], [2.0, 2.0, 1], sq)
    assert segment_hits_polytope([-1.0, 0.5, 0], [2.0, 0.5, 0], sq)


def test_enumerate_vertices_square():
    normals = np.array([[1.0, 0], [-1, 0], [0, 1], [0, -1]])
    bounds = np.array([1.0, 0.0, 1.0, 0.0])
    verts = enumerate_vertices(normals, bounds)
    assert len(verts) == 4


def test_polyline_length():
    assert polyline_length([[0, 0], [3, 4]]) == 5.0
    assert polyline_length([[1, 1]]) == 0.0


def test_angle_between():
    assert abs(angle_between([1, 0], [0, 2]) - np.pi / 2) < 1e-12
    assert abs(angle_between([1, 0], [-1, 0]) - np.pi) < 1e-12
