import itertools

import numpy as np
import pytest

from horofill import coxeter as cx
from horofill.geometry import angle_between, spherical_distance_to_cone, unit


@pytest.fixture(scope="module")
def a2():
    return cx.build_root_system("A", rank=2)


@pytest.fixture(scope="module")
def a3():
    return cx.build_root_system("A", rank=3)


@pytest.fixture(scope="module")
def a1a1():
    return cx.build_root_system("product", factors=[1, 1])


def test_group_orders(a2, a3, a1a1):
    assert a2.order == 6
    assert a3.order == 24
    assert a1a1.order == 4
    assert cx.build_root_system("A", rank=4).order == 120
    assert cx.build_root_system("product", factors=[2, 1]).order == 12


def test_reflection_counts(a2, a3, a1a1):
    assert len(a2.reflection_normals) == 3
    assert len(a3.reflection_normals) == 6
    assert len(a1a1.reflection_normals) == 2
    n0, n1 = a1a1.reflection_normals
    assert abs(np.dot(n0, n1)) < 1e-12


def test_bad_families_rejected():
    with pytest.raises(cx.UnsupportedRootSystem):
        cx.build_root_system("A", rank=1)
    with pytest.raises(cx.UnsupportedRootSystem):
        cx.build_root_system("E", rank=8)
    with pytest.raises(cx.UnsupportedRootSystem):
        cx.build_root_system("product", factors=[0, 1])
    with pytest.raises(cx.UnsupportedRootSystem):
        cx.build_root_system("A", rank=7)


def test_a2_matches_hand_enumerated_group(a2):
    """The six elements must be exactly {e, s0, s1, s0s1, s1s0, s0s1s0}."""
    s0 = np.eye(2) - 2 * np.outer(*(2 * [unit(a2.simple_roots[0])]))
    s1 = np.eye(2) - 2 * np.outer(*(2 * [unit(a2.simple_roots[1])]))
    hand = [np.eye(2), s0, s1, s0 @ s1, s1 @ s0, s0 @ s1 @ s0]
    assert len(a2.weyl_elements) == 6
    for w in a2.weyl_elements:
        assert any(np.allclose(w, h, atol=1e-12) for h in hand)
    for h in hand:
        assert any(np.allclose(w, h, atol=1e-12) for w in a2.weyl_elements)


def test_orbit_sizes(a2):
    bary = cx.project_to_chamber(a2, a2.coweights.sum(axis=0))
    assert len(cx.weyl_orbit(a2, bary.direction)) == 6
    wall = cx.project_to_chamber(a2, a2.coweights[0])
    assert len(cx.weyl_orbit(a2, wall.direction)) == 3


def test_orbit_size_divides_group_order(a3):
    rng = np.random.default_rng(7)
    for _ in range(5):
        v = unit(rng.normal(size=3))
        k = len(cx.weyl_orbit(a3, v))
        assert a3.order % k == 0


def test_exactly_one_orbit_member_in_chamber(a3):
    rng = np.random.default_rng(11)
    for _ in range(5):
        v = unit(rng.normal(size=3))
        orbit = cx.weyl_orbit(a3, v)
        inside = [p for p in orbit if a3.in_chamber(p)]
        assert len(inside) == 1


def test_projection_is_orbit_invariant(a2, a3):
    rng = np.random.default_rng(3)
    for rs in (a2, a3):
        v = unit(rng.normal(size=rs.rank))
        images = [cx.project_to_chamber(rs, w @ v).direction for w in rs.weyl_elements]
        for im in images[1:]:
            assert np.allclose(im, images[0], atol=1e-9)


def test_projection_identity_on_chamber(a3):
    v = unit(a3.coweights.sum(axis=0))
    assert np.allclose(cx.project_to_chamber(a3, v).direction, v, atol=1e-12)


def test_opposition_involution_is_involutive(a3):
    rng = np.random.default_rng(5)
    theta = cx.project_to_chamber(a3, unit(rng.normal(size=3)))
    opp = cx.opposition_image(a3, theta)
    back = cx.opposition_image(a3, opp)
    assert np.allclose(back.direction, theta.direction, atol=1e-9)


def test_ort_distance_product_cases(a1a1):
    e1 = cx.project_to_chamber(a1a1, np.array([1.0, 0.0]))
    e2 = cx.project_to_chamber(a1a1, np.array([0.0, 1.0]))
    assert cx.ort_distance(a1a1, e1, e2) < 1e-12
    assert abs(cx.ort_distance(a1a1, e1, e1) - np.pi / 2) < 1e-12


def test_ort_distance_a2_brute_force(a2):
    theta = cx.project_to_chamber(a2, a2.coweights.sum(axis=0))
    expected = min(
        abs(np.pi / 2 - angle_between(theta.direction, w @ theta.direction))
        for w in a2.weyl_elements
    )
    assert abs(cx.ort_distance(a2, theta, theta) - expected) < 1e-12


def test_ort_distance_symmetry_and_opposition_invariance(a3):
    rng = np.random.default_rng(13)
    for _ in range(5):
        th = cx.project_to_chamber(a3, unit(rng.normal(size=3)))
        be = cx.project_to_chamber(a3, unit(rng.normal(size=3)))
        d1 = cx.ort_distance(a3, th, be)
        assert abs(d1 - cx.ort_distance(a3, be, th)) < 1e-12
        assert abs(d1 - cx.ort_distance(a3, cx.opposition_image(a3, th), be)) < 1e-9
        assert abs(d1 - cx.ort_distance(a3, th, cx.opposition_image(a3, be))) < 1e-9


def test_delta_zero_a2_values(a2):
    bary = cx.project_to_chamber(a2, a2.coweights.sum(axis=0))
    prof = cx.delta_zero(a2, bary)
    assert not prof.degenerate
    assert abs(prof.delta0 - np.pi / 3) < 1e-8
    assert abs(prof.delta0_prime - np.pi / 3) < 1e-8
    wall = cx.project_to_chamber(a2, a2.coweights[0])
    prof2 = cx.delta_zero(a2, wall)
    assert abs(prof2.delta0 - np.pi / 6) < 1e-8


def test_delta_zero_gap_is_empty(a2, a3):
    """No wall distance may fall strictly inside the reported gaps."""
    for rs in (a2, a3):
        theta = cx.project_to_chamber(rs, unit(rs.coweights.sum(axis=0)))
        prof = cx.delta_zero(rs, theta)
        for d in prof.distances:
            assert not (np.pi / 2 - prof.delta0 + 1e-9 < d < np.pi / 2 - 1e-9)
            assert not (np.pi / 2 + 1e-9 < d < np.pi / 2 + prof.delta0_prime - 1e-9)


def test_delta_zero_degenerate_factor_parallel(a1a1):
    e1 = cx.project_to_chamber(a1a1, np.array([1.0, 0.0]))
    prof = cx.delta_zero(a1a1, e1)
    assert prof.degenerate
    for d in prof.distances:
        assert min(abs(d - x) for x in (0.0, np.pi / 2, np.pi)) < 1e-9


def test_delta_zero_a3_positive(a3):
    theta = cx.project_to_chamber(a3, unit(a3.coweights.sum(axis=0)))
    prof = cx.delta_zero(a3, theta)
    assert prof.delta0 > 0 and prof.delta0_prime > 0


def test_find_good_slope_a3(a3):
    theta = cx.project_to_chamber(a3, unit(a3.coweights.sum(axis=0)))
    res = cx.find_good_slope(a3, theta, 0.05)
    assert res.found
    assert cx.ort_distance(a3, theta, res.slope) > 0.05
    assert cx.wall_margin(a3, res.slope) > 0.05


def test_find_good_slope_impossible(a2):
    theta = cx.project_to_chamber(a2, a2.coweights.sum(axis=0))
    res = cx.find_good_slope(a2, theta, np.pi)
    assert not res.found
    assert res.resolution > 0


def test_find_good_slope_a2(a2):
    theta = cx.project_to_chamber(a2, a2.coweights.sum(axis=0))
    res = cx.find_good_slope(a2, theta, 0.01)
    assert res.found


def test_factor_split(a3, a1a1):
    theta = cx.project_to_chamber(a3, unit(a3.coweights.sum(axis=0)))
    out = cx.factor_split(a3, theta)
    assert len(out["factors"]) == 1
    assert out["parallel_to_factor"] is None

    e1 = cx.project_to_chamber(a1a1, np.array([1.0, 0.0]))
    out = cx.factor_split(a1a1, e1)
    assert len(out["factors"]) == 2
    assert out["parallel_to_factor"] is not None

    a2a1 = cx.build_root_system("product", factors=[2, 1])
    mixed = cx.project_to_chamber(a2a1, unit(a2a1.coweights.sum(axis=0)))
    out = cx.factor_split(a2a1, mixed)
    assert out["parallel_to_factor"] is None
    assert all(f["norm"] > 1e-9 for f in out["factors"])


def test_skew_hyperplane_a3(a3):
    theta = unit(a3.coweights.sum(axis=0))
    # singular plane orthogonal to a regular-ish direction
    phi = [a3.coweights[0], a3.coweights[1]]
    n = cx.skew_hyperplane(a3, 0, phi)
    assert n is not None
    q, _ = np.linalg.qr(np.array(phi).T)
    proj = np.linalg.norm(q.T @ n)
    assert 1e-9 < proj < 1 - 1e-9


def test_skew_hyperplane_nonexistent(a1a1):
    phi = [np.array([1.0, 0.0])]
    assert cx.skew_hyperplane(a1a1, 0, phi) is None


def test_skew_hyperplane_a2(a2):
    phi = [a2.coweights[0]]
    n = cx.skew_hyperplane(a2, 1, phi)
    assert n is not None


def test_descriptor_roundtrip(a3, a1a1):
    for rs in (a3, a1a1):
        rs2 = cx.root_system_from_descriptor(rs.to_descriptor())
        assert rs2.order == rs.order
        assert np.allclose(rs2.simple_roots, rs.simple_roots)


def test_spherical_distance_against_sampling():
    """Cone distances agree with dense sampling of the spherical section."""
    rng = np.random.default_rng(23)
    gens = [unit(v) for v in rng.normal(size=(3, 3))]
    for _ in range(20):
        u = unit(rng.normal(size=3))
        d = spherical_distance_to_cone(u, gens)
        best = np.pi
        for w in rng.dirichlet(np.ones(3), size=4000):
            p = unit(w @ np.array(gens))
            best = min(best, angle_between(u, p))
        assert d <= best + 1e-9
        assert d >= best - 0.05  # sampling resolution
