import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robustlinopt import geometry
from robustlinopt.errors import (
    CertificateViolation,
    DegenerateAxis,
    DimensionMismatch,
    EmptyInterior,
    NormExceedsOne,
    UnsupportedFamily,
    VertexOutsideHalfspace,
)

SQUARE_V = [[0.7, 0.7], [0.7, -0.7], [-0.7, 0.7], [-0.7, -0.7]]
SQUARE_H = [([1, 0], 0.7), ([-1, 0], 0.7), ([0, 1], 0.7), ([0, -1], 0.7)]
TRIANGLE_V = [[0.0, 0.0], [0.9, 0.0], [0.0, 0.9]]
TRIANGLE_H = [([-1, 0], 0.0), ([0, -1], 0.0), ([1 / math.sqrt(2), 1 / math.sqrt(2)], 0.9 / math.sqrt(2))]


# ---------------------------------------------------------------------------
# validation


def test_square_is_valid():
    p = geometry.validate_polytope(SQUARE_V, SQUARE_H)
    assert p.d == 2 and p.n_vertices == 4
    assert p.redundant == (False,) * 4


def test_vertex_outside_unit_ball():
    with pytest.raises(NormExceedsOne):
        geometry.validate_polytope([[2, 0], [0, 0.5], [-0.5, 0]], SQUARE_H)


def test_contradictory_halfspaces():
    with pytest.raises(EmptyInterior):
        geometry.validate_polytope([[0.0], [0.5]], [([1], 0.0), ([-1], -1.0)])


def test_vertex_outside_halfspace():
    with pytest.raises(VertexOutsideHalfspace):
        geometry.validate_polytope(SQUARE_V, SQUARE_H[:3] + [([0, -1], 0.5)])


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        geometry.validate_polytope(SQUARE_V, [([1, 0, 0], 1.0)])
    with pytest.raises(DimensionMismatch):
        geometry.validate_polytope([[0.1, 0.1], [0.2, 0.1]], SQUARE_H)


def test_redundant_halfspace_flagged():
    p = geometry.validate_polytope(SQUARE_V, SQUARE_H + [([1, 0], 0.9)])
    assert p.redundant[-1] and not any(p.redundant[:-1])


def test_json_round_trip(tmp_path):
    p = geometry.regular_simplex(3, 0.8)
    path = tmp_path / "p.json"
    geometry.save_polytope(p, path)
    data = json.loads(path.read_text())
    assert data["d"] == 3 and set(data["halfspaces"][0]) == {"a", "b"}
    q = geometry.load_polytope(path)
    np.testing.assert_array_equal(p.vertices, q.vertices)
    np.testing.assert_array_equal(p.A, q.A)
    np.testing.assert_array_equal(p.b, q.b)


# ---------------------------------------------------------------------------
# inscribed ellipsoid


def test_square_ellipsoid_is_inscribed_ball(square):
    E = geometry.inscribed_ellipsoid(square)
    np.testing.assert_allclose(E.center, 0.0, atol=1e-8)
    np.testing.assert_allclose(np.sort(E.lengths), [0.7, 0.7], rtol=1e-7)


def _inscribed_scale(A, b, c, phi, ratio):
    """Largest a such that the ellipse with center c, semi-axes a, a*ratio at angle phi fits."""
    R = np.array([[math.cos(phi), -math.sin(phi)], [math.sin(phi), math.cos(phi)]])
    slack = b - A @ c
    if np.any(slack <= 0):
        return 0.0
    spread = np.linalg.norm((A @ R) * np.array([1.0, ratio]), axis=1)
    return float(np.min(slack / spread))


def _oracle_area(A, b):
    """Grid plus coordinate descent over (center, angle, axis ratio); the scale is exact."""

    def area(p):
        cx, cy, phi, ratio = p
        if ratio <= 0:
            return 0.0
        a = _inscribed_scale(A, b, np.array([cx, cy]), phi, ratio)
        return math.pi * a * a * ratio

    best = None
    for cx in np.linspace(0.05, 0.6, 12):
        for cy in np.linspace(0.05, 0.6, 12):
            for phi in np.linspace(0, math.pi, 12, endpoint=False):
                for ratio in (0.3, 0.5, 0.7, 1.0):
                    p = np.array([cx, cy, phi, ratio])
                    v = area(p)
                    if best is None or v > best[0]:
                        best = (v, p)
    val, p = best
    step = np.array([0.05, 0.05, 0.2, 0.1])
    while step.max() > 1e-9:
        improved = False
        for k in range(4):
            for s in (1, -1):
                q = p.copy()
                q[k] += s * step[k]
                v = area(q)
                if v > val:
                    val, p, improved = v, q, True
        if not improved:
            step /= 2
    return val


def test_triangle_matches_brute_force_oracle():
    p = geometry.validate_polytope(TRIANGLE_V, TRIANGLE_H)
    E = geometry.inscribed_ellipsoid(p)
    oracle = _oracle_area(p.A, p.b)
    assert abs(E.volume() - oracle) / oracle < 1e-4
    # the Steiner inellipse has area pi / (3 sqrt 3) times the triangle area
    steiner = math.pi / (3 * math.sqrt(3)) * 0.5 * 0.9 * 0.9
    assert E.volume() == pytest.approx(steiner, rel=1e-6)
    np.testing.assert_allclose(E.center, [0.3, 0.3], atol=1e-6)


@pytest.mark.parametrize("family", geometry.FAMILIES)
@pytest.mark.parametrize("d", [1, 2, 3, 4, 5])
def test_family_matches_reference(family, d):
    p = geometry.family_polytope(family, d)
    E = geometry.inscribed_ellipsoid(p)
    ref = geometry.reference_ellipsoid(family, d)
    assert abs(E.log_volume() - ref.log_volume()) < 1e-6


def test_reference_unknown_family():
    with pytest.raises(UnsupportedFamily):
        geometry.reference_ellipsoid("dodecahedron", 3)


@pytest.mark.parametrize("d", [1, 2, 3, 4, 6])
def test_simplex_circumradius_to_inradius_is_d(d):
    p = geometry.regular_simplex(d)
    ref = geometry.reference_ellipsoid("regular_simplex", d)
    assert np.linalg.norm(p.vertices, axis=1).max() / ref.lengths[0] == pytest.approx(d, rel=1e-12)
    # and the solved ellipsoid certifies the same factor
    kappa = geometry.containment_factor(geometry.inscribed_ellipsoid(p), p)
    assert kappa == pytest.approx(d, rel=1e-6)


def _check_containment(E, p):
    support = p.A @ E.center + np.linalg.norm(p.A @ E.axes.T, axis=1)
    assert np.all(support <= p.b + 1e-9)


def test_random_polytopes_contain_and_certify():
    rng = np.random.default_rng(7)
    for _ in range(15):
        d = int(rng.integers(2, 5))
        p = geometry.random_polytope(d, rng)
        E = geometry.inscribed_ellipsoid(p)
        _check_containment(E, p)
        kappa = geometry.containment_factor(E, p)
        assert kappa <= 2 * d**1.5
        # John condition: every vertex inside the kappa-scaled ellipsoid
        gauges = [E.gauge(v) for v in p.vertices]
        assert max(gauges) <= kappa + 1e-9
        # semi-axes mutually orthogonal
        G = E.axes @ E.axes.T
        off = G - np.diag(np.diag(G))
        assert np.abs(off).max() <= 1e-9 * E.lengths.max() ** 2


def test_translation_equivariance():
    shift = np.array([0.1, -0.2, 0.05])
    p = geometry.random_linear_image(geometry.cross_polytope(3), np.random.default_rng(3), max_shift=0.1)
    q = geometry.validate_polytope(p.vertices + shift * 0.5, (p.A, p.b + p.A @ (shift * 0.5)))
    E, F = geometry.inscribed_ellipsoid(p), geometry.inscribed_ellipsoid(q)
    np.testing.assert_allclose(F.center - E.center, shift * 0.5, atol=1e-7)
    np.testing.assert_allclose(F.shape_matrix, E.shape_matrix, atol=1e-7)


# ---------------------------------------------------------------------------
# exploration basis and decomposition


def test_square_basis(square_basis):
    np.testing.assert_allclose(square_basis.origin_shift, 0.0, atol=1e-8)
    np.testing.assert_allclose(np.sort(np.abs(square_basis.axes).max(axis=1)), [0.7, 0.7], rtol=1e-7)


def test_translated_box_basis():
    p = geometry.box(2, 0.2, center=[0.3, 0.3])
    b = geometry.exploration_basis(p)
    np.testing.assert_allclose(b.origin_shift, [0.3, 0.3], atol=1e-8)
    np.testing.assert_allclose(np.sort(np.linalg.norm(b.axes, axis=1)), [0.2, 0.2], rtol=1e-7)
    np.testing.assert_allclose(b.shifted_vertices, p.vertices - b.origin_shift)
    assert b.reward_offset([1.0, 0.0]) == pytest.approx(0.3, abs=1e-8)


def test_axis_endpoints_inside(rng):
    p = geometry.random_polytope(3, rng)
    b = geometry.exploration_basis(p)
    for sign in (1, -1):
        for j in range(3):
            assert p.contains(b.point(j, sign))


def test_exact_mode_rejects_large_kappa():
    # a ball far smaller than the optimum certifies kappa = 7 > d
    p = geometry.box(2, 0.7)
    small = geometry.Ellipsoid(np.zeros(2), 0.1 * np.eye(2))
    with pytest.raises(CertificateViolation):
        geometry.exploration_basis(p, small, mode="exact_ellipsoid")


def test_degenerate_axis():
    p = geometry.box(2, 0.7)
    flat = geometry.Ellipsoid(np.zeros(2), np.diag([0.5, 1e-13]))
    with pytest.raises(DegenerateAxis):
        geometry.exploration_basis(p, flat)


def _basis(axes):
    axes = np.asarray(axes, dtype=float)
    d = axes.shape[0]
    return geometry.ExplorationBasis(np.zeros(d), axes, kappa=float(d))


def test_decompose_examples():
    np.testing.assert_allclose(geometry.decompose([0.3, -0.4], _basis(np.eye(2))).coefficients, [0.3, -0.4])
    np.testing.assert_allclose(geometry.decompose([1, 1], _basis(np.diag([2.0, 1.0]))).coefficients, [0.5, 1.0])


@settings(max_examples=60, deadline=None)
@given(
    angle=st.floats(0, 2 * math.pi),
    l1=st.floats(0.05, 1.0),
    l2=st.floats(0.05, 1.0),
    x=st.lists(st.floats(-5, 5), min_size=2, max_size=2),
)
def test_decompose_reconstruct_identity(angle, l1, l2, x):
    R = np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])
    b = _basis((R * [l1, l2]).T)
    rec = geometry.reconstruct(geometry.decompose(x, b), b)
    np.testing.assert_allclose(rec, x, atol=1e-9)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_coefficient_bound_on_samples(seed):
    rng = np.random.default_rng(seed)
    d = 3
    p = geometry.random_polytope(d, rng)
    b = geometry.exploration_basis(p)
    w = rng.dirichlet(np.ones(p.n_vertices), size=1000)
    pts = w @ b.shifted_vertices
    coeffs = np.array([geometry.decompose(x, b).coefficients for x in pts])
    assert np.abs(coeffs).max() <= b.coefficient_bound
    # vertices too, where the bound is tightest
    vc = np.array([geometry.decompose(v, b).coefficients for v in b.shifted_vertices])
    assert np.abs(vc).max() <= b.coefficient_bound
