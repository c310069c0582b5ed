import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import monomial_integral, monomials

from fene_fps import DistributionField, build_basis, build_quadrature, evaluate_field
from fene_fps.basis import polar_grid


def test_dimension_counts():
    assert build_basis(2, 0, 8.0).size == 1
    assert build_basis(2, 2, 8.0).size == 6
    for N in range(12):
        assert build_basis(2, N, 8.0).size == (N + 1) * (N + 2) // 2


def test_unsupported_dimension():
    with pytest.raises(ValueError, match="unsupported"):
        build_basis(3, 4, 8.0)
    with pytest.raises(ValueError):
        build_quadrature(3, 4, 8.0)


def test_first_function_is_constant():
    spec = build_basis(2, 5, 8.0)
    pts = np.random.default_rng(0).uniform(-0.7, 0.7, (20, 2))
    v = spec.evaluate(pts)[:, 0]
    np.testing.assert_allclose(v, v[0], rtol=1e-14)
    assert v[0] == pytest.approx(1 / math.sqrt(math.pi / 9), rel=1e-14)


@pytest.mark.parametrize("delta", [1.5, 8.0, 12.5, 50.0])
def test_gram_matrix_is_identity(delta):
    spec = build_basis(2, 14, delta)
    quad = build_quadrature(2, 2 * 14 + 4, delta)
    V = spec.evaluate(quad.nodes)
    G = (V * quad.weights[:, None]).T @ V
    assert np.abs(G - np.eye(spec.size)).max() <= 1e-12


def test_basis_spans_all_polynomials_of_degree():
    # the 15 monomials of degree <= 4 are reproduced exactly by the degree-4 basis
    spec = build_basis(2, 4, 8.0)
    quad = build_quadrature(2, 12, 8.0)
    V = spec.evaluate(quad.nodes)
    for a, b in monomials(4):
        f = quad.nodes[:, 0] ** a * quad.nodes[:, 1] ** b
        c = quad.integrate(V * f[:, None])
        np.testing.assert_allclose(V @ c, f, atol=1e-12)


def test_gradients_match_finite_differences():
    spec = build_basis(2, 10, 8.0)
    pts = np.array([[0.3, -0.2], [-0.55, 0.41], [0.02, 0.01]])
    _, G = spec.evaluate(pts, gradient=True)
    h = 1e-6
    for d, e in enumerate(np.eye(2)):
        fd = (spec.evaluate(pts + h * e) - spec.evaluate(pts - h * e)) / (2 * h)
        np.testing.assert_allclose(G[:, :, d], fd, atol=1e-6 * np.abs(G).max())


def test_quadrature_examples():
    q = build_quadrature(2, 10, 8.0)
    assert q.integrate(np.ones(len(q.weights))) == pytest.approx(math.pi / 9, rel=1e-14)
    assert q.integrate(q.nodes[:, 0] ** 2) == pytest.approx(math.pi / 180, rel=1e-14)
    assert q.integrate(np.zeros(len(q.weights))) == 0.0


@pytest.mark.parametrize("gamma", [-0.5, 0.0, 7.0, 8.0, 49.0])
def test_quadrature_positive_and_interior(gamma):
    q = build_quadrature(2, 20, gamma)
    assert np.all(q.weights > 0)
    assert np.all(np.sum(q.nodes**2, axis=1) < 1.0)


def test_quadrature_rejects_bad_requests():
    with pytest.raises(ValueError):
        build_quadrature(2, -1, 8.0)
    with pytest.raises(ValueError):
        build_quadrature(2, 4, -1.0)


@settings(max_examples=20, deadline=None)
@given(
    deg=st.integers(0, 20),
    gamma=st.sampled_from([0.5, 7.0, 8.0, 12.25]),
    seed=st.integers(0, 2**31),
)
def test_quadrature_exact_on_random_polynomials(deg, gamma, seed):
    rng = np.random.default_rng(seed)
    mons = monomials(deg)
    c = rng.standard_normal(len(mons))
    q = build_quadrature(2, deg, gamma)
    x, y = q.nodes[:, 0], q.nodes[:, 1]
    vals = sum(ci * x**a * y**b for ci, (a, b) in zip(c, mons))
    exact = [monomial_integral(a, b, gamma) for a, b in mons]
    scale = sum(abs(ci * e) for ci, e in zip(c, exact)) or 1.0
    assert abs(q.integrate(vals) - np.dot(c, exact)) <= 1e-12 * scale


def test_boundary_trace_vanishes():
    spec = build_basis(2, 12, 8.0)
    th = np.linspace(0, 2 * np.pi, 97)
    ring = np.stack([np.cos(th), np.sin(th)], 1)
    rng = np.random.default_rng(1)
    for _ in range(5):
        f = DistributionField(spec, rng.standard_normal(spec.size))
        psi, ratio = evaluate_field(f, ring)
        assert np.all(psi == 0.0)
        assert np.any(ratio != 0.0)


def test_evaluate_linearity():
    spec = build_basis(2, 8, 8.0)
    rng = np.random.default_rng(3)
    f1 = DistributionField(spec, rng.standard_normal(spec.size))
    f2 = DistributionField(spec, rng.standard_normal(spec.size))
    pts = polar_grid(11, 13)
    lhs = evaluate_field(2.0 * f1 + (-0.5) * f2, pts)
    r1, r2 = evaluate_field(f1, pts), evaluate_field(f2, pts)
    for k in range(2):
        np.testing.assert_allclose(lhs[k], 2.0 * r1[k] - 0.5 * r2[k], atol=1e-12)


def test_polar_grid_includes_centre_and_ring():
    g = polar_grid()
    r = np.linalg.norm(g, axis=1)
    assert g.shape == (40000, 2)
    assert r.min() == 0.0
    assert np.sum(np.isclose(r, 1.0)) == 200


def test_padding_preserves_field():
    small, big = build_basis(2, 6, 8.0), build_basis(2, 10, 8.0)
    f = DistributionField(small, np.random.default_rng(0).standard_normal(small.size))
    pts = polar_grid(7, 9)
    np.testing.assert_allclose(evaluate_field(f.padded(big), pts)[1], evaluate_field(f, pts)[1], atol=1e-12)
