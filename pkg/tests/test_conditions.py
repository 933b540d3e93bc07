import numpy as np
import pytest
from hypothesis import given, strategies as st

from we_kit.conditions import (
    adapted_basis,
    basis_oracle,
    equiv_conditions,
    identity_suite,
    is_weakly_einstein,
    kahler_spectrum_check,
)
from we_kit.examples import (
    STANDARD_J,
    constant_curvature,
    eps_space,
    product_surfaces,
    random_curvature,
    random_kahler_curvature,
)
from we_kit.family import FamilyParams, PolynomialEta, frame_point
from we_kit.ode_q import QSpec
from we_kit.tensors import ComplexStructure, contraction_bundle, square


def random_metric(seed, n):
    A = np.random.default_rng(seed).normal(size=(n, n))
    return A @ A.T + n * np.eye(n)


def test_is_weakly_einstein_examples():
    ex = constant_curvature(1.0)
    assert is_weakly_einstein(ex.R, ex.g)[0]
    ex = product_surfaces(1.0, -1.0)
    ok, res = is_weakly_einstein(ex.R, ex.g)
    assert ok and res < 1e-15
    ex = product_surfaces(1.0, -2.0)
    ok, res = is_weakly_einstein(ex.R, ex.g)
    assert not ok and res > 0.1


@given(st.integers(0, 2**32 - 1), st.floats(0.01, 100.0))
def test_identity_suite_dimension_four(seed, scale):
    R = scale * random_curvature(seed, 4)
    g = random_metric(seed ^ 0x5A5A, 4)
    rep = identity_suite(R, g)
    for val in (rep.trf_residual, rep.trm_residual, rep.trcW_multiple_residual,
                rep.trw1_residual, rep.trw2_residual):
        assert 0.0 <= val <= 1e-9
    assert rep.iff_consistency


@pytest.mark.parametrize("n", [5, 6])
def test_identity_suite_higher_dimension(n):
    for seed in range(40):
        rep = identity_suite(random_curvature(seed, n), random_metric(seed, n))
        assert rep.trw1_residual <= 1e-9 and rep.trw2_residual <= 1e-9
        assert rep.trf_residual is None and rep.iff_consistency is None


def test_identity_suite_zero_and_errors():
    rep = identity_suite(np.zeros((4,) * 4), np.eye(4))
    assert rep.trf_residual == rep.trm_residual == rep.trw1_residual == 0.0
    with pytest.raises(ValueError):
        identity_suite(np.zeros((3,) * 4), np.eye(3))


def test_identity_suite_detects_a_wrong_coefficient():
    # the same combinations with a perturbed coefficient must not be multiples of g
    from we_kit.tensors import act_on_sym, multiple_of_metric
    R = random_curvature(3, 4)
    g = np.eye(4)
    b = contraction_bundle(R, g)
    wrong = b.trc - 2 * act_on_sym(R, b.ricci, g) + b.scalar * b.ricci - 2.5 * square(b.ricci, g)
    assert multiple_of_metric(wrong, g).residual > 1e-3


def test_spectrum_examples():
    chk = kahler_spectrum_check(np.diag([1.0, 1.0, -1.0, -1.0]), np.eye(4))
    assert chk.spectrum_ok and chk.a_value == pytest.approx(1.0) and chk.rrr_applicable
    chk = kahler_spectrum_check(np.diag([-2.0, 2.0, 0.0, 0.0]), np.eye(4))
    assert not chk.spectrum_ok and chk.trq_residual is None
    chk = kahler_spectrum_check(np.zeros((4, 4)), np.eye(4))
    assert chk.spectrum_ok and chk.a_value == 0.0


def test_spectrum_rejects_traced_input():
    with pytest.raises(ValueError):
        kahler_spectrum_check(np.eye(4), np.eye(4))
    with pytest.raises(ValueError):
        kahler_spectrum_check(np.zeros((5, 5)), np.eye(5))


@given(st.floats(-5, 5), st.floats(-20, 20), st.integers(0, 2**32 - 1))
def test_trq_vanishes_when_spectrum_matches(a, s, seed):
    # e with spectrum (a, a, -a, -a) in a random g-orthonormal frame
    g = random_metric(seed, 4)
    L = np.linalg.cholesky(g)
    Q, _ = np.linalg.qr(np.random.default_rng(seed).normal(size=(4, 4)))
    e = L @ Q @ np.diag([a, a, -a, -a]) @ Q.T @ L.T
    chk = kahler_spectrum_check(e, g, scalar=s)
    assert chk.spectrum_ok
    assert abs(chk.a_value - abs(a)) <= 1e-9 * max(1.0, abs(a))
    assert chk.trq_residual <= 1e-10


def test_equiv_product_examples():
    for K1, K2, want in [(1.0, -1.0, True), (1.0, 1.0, True), (1.0, -2.0, False)]:
        ex = product_surfaces(K1, K2)
        rep = equiv_conditions(ex.R, ex.g, ex.J)
        assert rep.conditions == (want,) * 4
        assert rep.ricci_hermitian and rep.spectrum_ok


def test_equiv_rejects_non_hermitian_metric():
    ex = product_surfaces(1.0, -1.0)
    with pytest.raises(ValueError):
        equiv_conditions(ex.R, np.diag([1.0, 2.0, 1.0, 1.0]), ex.J)
    with pytest.raises(ValueError):
        equiv_conditions(np.zeros((6,) * 4), np.eye(6),
                         ComplexStructure.from_pairs(6, [(0, 1), (2, 3), (4, 5)]))


def test_equiv_reports_non_kahler_ricci():
    ex = eps_space(1.0)
    rep = equiv_conditions(ex.R, ex.g, STANDARD_J)
    assert not rep.ricci_hermitian


def test_equiv_agreement_on_family_points():
    qs = QSpec(4.0, 0.0, 1, 0.3, 0.0)
    params = FamilyParams.from_qspec(qs)
    bad = FamilyParams(1.0, -1.0, -1.0, 0.0, PolynomialEta((0.5, 0.2, 0.1)))
    for t in (0.5, 1.0, 1.7):
        fp = frame_point(params, t)
        rep = equiv_conditions(fp.R, fp.g, fp.J, 1e-8)
        assert rep.conditions == (True,) * 4
        fp = frame_point(bad, t)
        rep = equiv_conditions(fp.R, fp.g, fp.J, 1e-8)
        assert rep.conditions == (False,) * 4 and rep.ricci_hermitian


@pytest.mark.parametrize("seed", range(50))
def test_equiv_agreement_random_kahler(seed):
    ex = random_kahler_curvature(seed)
    rep = equiv_conditions(ex.R, ex.g, ex.J, 1e-8)
    assert rep.agree and rep.ricci_hermitian and rep.spectrum_ok
    oracle, _ = basis_oracle(ex.R, ex.g, ex.J, 1e-8)
    assert oracle == rep.cond_d


def test_basis_oracle_on_family_and_products():
    params = FamilyParams.from_qspec(QSpec(4.0, 0.0, 1, 0.0, 0.7))
    fp = frame_point(params, 1.3)
    assert basis_oracle(fp.R, fp.g, fp.J, 1e-8)[0] is True
    ex = product_surfaces(1.0, -2.0)
    assert basis_oracle(ex.R, ex.g, ex.J, 1e-8)[0] is False
    ex = product_surfaces(1.0, 1.0)
    assert basis_oracle(ex.R, ex.g, ex.J) == (None, 0.0)


def test_adapted_basis_is_orthonormal_and_complex():
    params = FamilyParams.from_qspec(QSpec(4.0, 0.0, 1, 0.3, 0.0))
    fp = frame_point(params, 0.8)
    b = contraction_bundle(fp.R, fp.g)
    basis = adapted_basis(b.einstein, fp.g, fp.J)
    assert np.allclose(basis.T @ fp.g.g @ basis, np.eye(4), atol=1e-12)
    assert np.allclose(fp.J.J @ basis[:, 0], basis[:, 1], atol=1e-12)
    assert np.allclose(fp.J.J @ basis[:, 2], basis[:, 3], atol=1e-12)
    e_adapted = basis.T @ b.einstein @ basis
    assert np.allclose(e_adapted, np.diag(np.diag(e_adapted)), atol=1e-12)
