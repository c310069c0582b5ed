import math

import numpy as np
import pytest
from conftest import ROTATION, SHEAR, make_mats
from oracles import mass_matrix_oracle, random_traceless, stiffness_matrix_oracle

from fene_fps import (
    DriftField,
    FeneParams,
    apply_L,
    assemble,
    bilinear_a_alpha,
    build_basis,
    compute_alpha,
    equilibrium_density,
    solve_B_alpha,
)
from fene_fps.assembly import coercivity_lower_bound, dump_matrix_market


def test_zero_drift_gives_zero_D():
    mats = make_mats(np.zeros((2, 2)))
    assert np.all(mats.D == 0.0)


def test_constant_test_row_vanishes():
    mats = make_mats(3.0 * SHEAR)
    assert np.abs(mats.S[0]).max() <= 1e-13 * np.abs(mats.S).max()
    assert np.abs(mats.D[0]).max() <= 1e-13 * np.abs(mats.D).max()


@pytest.mark.parametrize("wi", [0.1, 1.0, 5.0])
def test_antisymmetric_drift_gives_skew_D(wi):
    mats = make_mats(wi * ROTATION)
    assert np.linalg.norm(mats.D + mats.D.T) <= 1e-12 * np.linalg.norm(mats.D)


def test_matrix_properties():
    mats = make_mats(SHEAR, degree=14)
    np.testing.assert_allclose(mats.S, mats.S.T, atol=1e-13)
    eS = np.linalg.eigvalsh(mats.S)
    assert eS.min() >= -1e-12 * eS.max()
    # kernel of S is exactly the constant direction
    assert abs(eS[0]) <= 1e-10 and eS[1] > 1.0
    eN = np.linalg.eigvalsh(mats.N)
    assert eN.min() > 0


@pytest.mark.parametrize("delta", [2.5, 8.0])
def test_matrices_against_beta_oracle(delta):
    spec = build_basis(2, 4, delta)
    mats = assemble(spec, DriftField.zero(2), 1.0)
    N_or = mass_matrix_oracle(spec, 4, delta)
    S_or = stiffness_matrix_oracle(spec, 4, delta)
    assert np.abs(mats.N - N_or).max() <= 1e-12 * np.abs(N_or).max()
    assert np.abs(mats.S - S_or).max() <= 1e-12 * np.abs(S_or).max()


def test_apply_L_kills_equilibrium():
    p = FeneParams()
    for A in (np.zeros((2, 2)), 5.0 * ROTATION):
        mats = make_mats(A)
        eq = equilibrium_density(p, mats.spec)
        assert np.linalg.norm(apply_L(mats, eq.coeffs)) <= 1e-12 * np.linalg.norm(mats.S)


def test_equilibrium_invariant_k0():
    # A_alpha c_eq = alpha N c_eq
    p = FeneParams()
    mats = make_mats(np.zeros((2, 2)), degree=16)
    c = equilibrium_density(p, mats.spec).coeffs
    lhs, rhs = mats.A_alpha @ c, mats.alpha * (mats.N @ c)
    assert np.linalg.norm(lhs - rhs) <= 1e-10 * np.linalg.norm(rhs)


def test_pairing_with_M_vanishes_for_random_u():
    rng = np.random.default_rng(11)
    mats = make_mats(random_traceless(rng) * 2.0)
    for _ in range(10):
        u = rng.standard_normal(mats.spec.size)
        assert abs(apply_L(mats, u)[0]) <= 1e-12 * np.linalg.norm(mats.L) * np.linalg.norm(u)


def test_coercivity_on_random_vectors():
    rng = np.random.default_rng(5)
    for A in (SHEAR, 5.0 * SHEAR, random_traceless(rng) * 3.0):
        drift = DriftField.linear(A)
        mats = make_mats(A)
        for _ in range(20):
            u = rng.standard_normal(mats.spec.size)
            a = bilinear_a_alpha(mats, u, u)
            assert a > 0
            assert a >= coercivity_lower_bound(mats, u, drift.k_sup) - 1e-10 * abs(a)


def test_constant_test_function_pairs_to_alpha_mass():
    rng = np.random.default_rng(2)
    mats = make_mats(SHEAR)
    e0 = np.zeros(mats.spec.size)
    e0[0] = 1.0
    for _ in range(5):
        u = rng.standard_normal(mats.spec.size)
        assert bilinear_a_alpha(mats, u, e0) == pytest.approx(mats.alpha * e0 @ mats.N @ u, rel=1e-12, abs=1e-12)


def test_scaling_in_b():
    mats = make_mats(SHEAR)
    rng = np.random.default_rng(4)
    f = rng.standard_normal(mats.spec.size)
    np.testing.assert_allclose(solve_B_alpha(mats, 2 * f), 2 * solve_B_alpha(mats, f), rtol=1e-13)


def test_custom_drift_matches_linear_and_reports_residual():
    A = np.array([[0.2, 1.0], [-0.3, -0.2]])
    spec = build_basis(2, 8, 8.0)
    lin = DriftField.linear(A)
    cus = DriftField.custom(2, lambda x: x @ A.T, lambda x: np.zeros(x.shape[:-1]), lin.k_sup, 0.0)
    m1 = assemble(spec, lin, 80.0)
    m2 = assemble(spec, cus, 80.0)
    np.testing.assert_allclose(m2.D, m1.D, atol=1e-13)
    assert m2.quadrature_residual <= 1e-13
    # a non-polynomial drift leaves a visible quadrature residual
    sin_drift = DriftField.custom(
        2, lambda x: np.stack([np.sin(6 * x[..., 1]), np.zeros(x.shape[:-1])], -1), lambda x: np.zeros(x.shape[:-1]), 1.0, 0.0
    )
    m3 = assemble(spec, sin_drift, 80.0)
    assert m3.quadrature_residual > 1e-12


def test_ill_conditioning_warning():
    spec = build_basis(2, 4, 8.0)
    with pytest.warns(UserWarning, match="ill-conditioned"):
        assemble(spec, DriftField.zero(2), 1e-14)


def test_matrix_market_dump(tmp_path):
    import scipy.io

    mats = make_mats(SHEAR, degree=4)
    paths = dump_matrix_market(mats, tmp_path)
    assert [p.name for p in paths] == ["S.mtx", "D.mtx", "N.mtx", "A_alpha.mtx"]
    back = scipy.io.mmread(str(tmp_path / "D.mtx")).toarray()
    np.testing.assert_array_equal(back, mats.D)
    assert paths[0].read_text().startswith("%%MatrixMarket matrix coordinate real")


def test_alpha_from_bound_is_used():
    A = 2.0 * SHEAR
    mats = make_mats(A)
    assert mats.alpha == compute_alpha(DriftField.linear(A), 2).alpha
    assert math.isfinite(mats.condition_number())
