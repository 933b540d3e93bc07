import numpy as np
import pytest

from we_kit.family import (
    FAMILY_ORIENTATION,
    ConstantEta,
    FamilyParams,
    PolynomialEta,
    QSpecEta,
    curvature_from_connection,
    curvature_from_connection_tensor,
    family_scan,
    frame_point,
    koszul_check,
    koszul_connection,
    lie_brackets,
    positive_window,
    ricci_eigs_potential_path,
    we_residual,
)
from we_kit.ode_q import QSpec
from we_kit.tensors import (
    act_on_form,
    contraction_bundle,
    curvature_symmetry_residuals,
    form_norm,
    hodge_split,
    j_ops,
    ricci,
)

FLAT = FamilyParams(1.0, -1.0, -1.0, 0.0, ConstantEta(0.5))
QS = QSpec(4.0, 0.0, 1, 0.3, 0.0)
PARAMS = FamilyParams.from_qspec(QS)


def generic_specs():
    rng = np.random.default_rng(77)
    out = []
    for k in range(6):
        eps = 1 if k % 2 == 0 else -1
        qs = QSpec(rng.uniform(1, 8), rng.uniform(-2, 2), eps, rng.uniform(-0.5, 0.5),
                   rng.uniform(-0.5, 0.5))
        out.append((qs, FamilyParams.from_qspec(qs, p=rng.uniform(0.5, 2) * rng.choice([-1, 1]))))
    return out


def window(qs, count=10):
    lo, hi = sorted((qs.gamma + qs.eps * 0.3, qs.gamma + qs.eps * 3.0))
    return positive_window(qs, lo, hi, count)


def test_flat_member():
    fp = frame_point(FLAT, 1.0)
    assert fp.zeta == 1.0 and fp.Q == 2.0
    assert np.abs(fp.R).max() <= 1e-12
    assert fp.mu == 0.0 and fp.lam == 0.0
    for t in (0.2, 1.0, 5.0):
        assert we_residual(FLAT, None, t) == (0.0, 0.0)


def test_frame_point_metric_and_ricci_blocks():
    fp = frame_point(PARAMS, 1.0)
    d = np.diag(fp.g.g)
    assert d[0] == d[2] == pytest.approx(fp.zeta * fp.eta)
    assert d[1] == d[3] == pytest.approx(fp.zeta)
    assert not np.any(fp.g.g - np.diag(d))
    r = fp.ricci
    assert np.allclose(r, np.diag(np.diag(r)), atol=1e-10)
    assert r[0, 0] / d[0] == pytest.approx(r[2, 2] / d[2])
    assert r[1, 1] / d[1] == pytest.approx(r[3, 3] / d[3])
    # closed-form Ricci equals the contraction of the closed-form curvature
    assert np.abs(ricci(fp.R, fp.g) - r).max() < 1e-12
    assert fp.J.is_hermitian_metric(fp.g)


def test_frame_point_rejects_bad_points():
    with pytest.raises(ValueError):
        frame_point(FLAT, 0.0)
    with pytest.raises(ValueError):
        frame_point(FLAT, -1.0)  # zeta < 0
    with pytest.raises(ValueError):
        frame_point(FamilyParams(1.0, -1.0, -1.0, 0.0, PolynomialEta((1.0, -1.0))), 2.0)


def test_params_validation():
    with pytest.raises(ValueError):
        FamilyParams(0.0, 1.0, 1.0, 0.0, ConstantEta(1.0))
    with pytest.raises(ValueError):
        FamilyParams(1.0, -1.0, -1.0, 0.0, ConstantEta(0.5), interval=(-1.0, 1.0))
    with pytest.raises(ValueError):
        FamilyParams.from_qspec(QSpec(0.0, 0.0, 1, 1.0, 0.0))
    FamilyParams(1.0, -1.0, -1.0, 0.0, ConstantEta(0.5), interval=(0.1, 3.0))


def test_from_qspec_sign_choices():
    for qs in (QS, QSpec(4.0, 1.0, -1, 0.2, 0.1)):
        params = FamilyParams.from_qspec(qs)
        assert 4 * qs.eps * params.q * params.theta == pytest.approx(qs.K)
        t = qs.gamma + qs.eps * 1.0
        fp = frame_point(params, t)
        assert fp.zeta > 0 and fp.eta > 0
        assert fp.eta == pytest.approx(QSpecEta(qs, params.p, params.theta)(t)[0])


def test_qspec_eta_derivatives():
    eta = QSpecEta(QS, 1.0, -1.0)
    for t in (0.4, 1.0, 2.5):
        h = 1e-5
        e0, e1, e2 = eta(t)
        assert (eta(t + h)[0] - eta(t - h)[0]) / (2 * h) == pytest.approx(e1, rel=1e-8)
        assert (eta(t + h)[1] - eta(t - h)[1]) / (2 * h) == pytest.approx(e2, rel=1e-6)


def test_koszul_matches_closed_form():
    assert koszul_check(FLAT, 1.0) <= 1e-12
    rng = np.random.default_rng(5)
    for qs, params in generic_specs():
        for t in rng.choice(window(qs, 40), 10):
            assert koszul_check(params, float(t)) <= 1e-10


def test_koszul_negative_control():
    bad = lie_brackets(PARAMS.p, 2 * PARAMS.q)
    assert koszul_check(PARAMS, 1.0, bad) > 0.1


def test_koszul_connection_is_torsion_free_and_metric():
    t = 1.3
    G = koszul_connection(PARAMS, t)
    C = lie_brackets(PARAMS.p, PARAMS.q)
    assert np.allclose(G - G.transpose(1, 0, 2), C, atol=1e-12)


def test_curvature_from_connection():
    assert curvature_from_connection(FLAT, 1.0, 1e-5) <= 1e-8
    assert curvature_from_connection(PARAMS, 1.0, 1e-5) <= 1e-6
    Rfd = curvature_from_connection_tensor(PARAMS, 1.0)
    assert curvature_symmetry_residuals(Rfd).max() < 1e-6


def test_curvature_convergence_order():
    d1 = curvature_from_connection(PARAMS, 1.0, 1e-3)
    d2 = curvature_from_connection(PARAMS, 1.0, 5e-4)
    assert 3.5 < d1 / d2 < 4.5


def test_closed_form_curvature_symmetries():
    for qs, params in generic_specs():
        for t in window(qs, 5):
            fp = frame_point(params, float(t))
            assert curvature_symmetry_residuals(fp.R).max() <= 1e-12 * max(1, np.abs(fp.R).max())


def test_we_residual_examples():
    einstein = QSpec(4.0, 0.0, 1)
    p_e = FamilyParams.from_qspec(einstein)
    assert we_residual(p_e, einstein, 1.0) == (0.0, 0.0)
    for t in (0.5, 1.0, 2.0):
        umq, ein = we_residual(PARAMS, QS, t)
        assert umq <= 1e-10 and ein > 0
    qs_b = QSpec(4.0, 0.0, 1, 0.0, 0.7)
    assert we_residual(FamilyParams.from_qspec(qs_b), qs_b, 1.0)[0] <= 1e-10


def test_we_residual_from_eta_profile():
    for t in (0.5, 1.0, 2.0):
        assert we_residual(PARAMS, None, t)[0] <= 1e-10
    poly = FamilyParams(1.0, -1.0, -1.0, 0.0, PolynomialEta((0.5, 0.2, 0.1)))
    assert we_residual(poly, None, 1.0)[0] > 1e-3


def test_we_residual_errors():
    with pytest.raises(ValueError):
        we_residual(PARAMS, QSpec(5.0, 0.0, 1, 0.3, 0.0), 1.0)
    with pytest.raises(ValueError):
        we_residual(PARAMS, QSpec(-4.0, 0.0, -1, 0.3, 0.0), 1.0)
    with pytest.raises(ValueError):
        we_residual(PARAMS, QS, 0.0)


def test_potential_path_examples():
    mu, lam = ricci_eigs_potential_path(QSpec(4.0, 0.0, 1), 1.0)
    assert mu == pytest.approx(0.0, abs=1e-15) and lam == pytest.approx(0.0, abs=1e-15)
    fp = frame_point(PARAMS, 1.0)
    assert ricci_eigs_potential_path(QS, 1.0) == pytest.approx((fp.mu, fp.lam), abs=1e-10)


def test_cross_path_agreement():
    for qs, params in generic_specs():
        for t in window(qs, 8):
            fp = frame_point(params, float(t))
            mu, lam = ricci_eigs_potential_path(qs, float(t))
            scale = max(1.0, abs(fp.mu), abs(fp.lam))
            assert abs(mu - fp.mu) <= 1e-9 * scale and abs(lam - fp.lam) <= 1e-9 * scale


def test_kahler_identity_and_anti_self_duality():
    for qs, params in generic_specs():
        for t in window(qs, 5):
            fp = frame_point(params, float(t))
            b = contraction_bundle(fp.R, fp.g)
            omega = fp.J.kahler_form(fp.g)
            scale = max(1.0, abs(b.scalar))
            assert form_norm(act_on_form(b.weyl, omega, fp.g) - b.scalar / 6 * omega,
                             fp.g) <= 1e-9 * scale
            eta = j_ops(b.einstein, fp.J).aJ
            sd, asd = hodge_split(eta, fp.g, FAMILY_ORIENTATION)
            assert form_norm(sd, fp.g) <= 1e-10 * max(1.0, form_norm(eta, fp.g))
            # omega itself is self-dual for this orientation
            assert form_norm(hodge_split(omega, fp.g, FAMILY_ORIENTATION)[1], fp.g) <= 1e-12


def test_non_homogeneity_witness():
    ts = np.linspace(0.5, 2.0, 10)
    mus = [frame_point(PARAMS, float(t)).mu for t in ts]
    assert max(mus) - min(mus) > 1e-3
    einstein = FamilyParams.from_qspec(QSpec(4.0, 0.0, 1))
    mus = [frame_point(einstein, float(t)).mu for t in ts]
    assert max(abs(m) for m in mus) < 1e-12


def test_family_scan_rows_in_order():
    ts = window(QS, 10)
    rows = family_scan(PARAMS, ts)
    assert [r.t for r in rows] == list(ts)
    for r in rows:
        assert r.report.conditions == (True,) * 4
        assert r.umq_residual <= 1e-10
        assert set(r.as_dict()) >= {"t", "Q", "mu", "lambda", "cond_d"}


def test_positive_window_rejects_negative_q():
    with pytest.raises(ValueError):
        positive_window(QSpec(-4.0, 0.0, 1), 0.5, 2.0, 10)
