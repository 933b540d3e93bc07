"""Weakly Einstein predicates, the dimension-four identity chain, and the
algebraic conditions (a)-(d) for Kahler-type curvature tensors."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .tensors import (
    DEFAULT_TOL,
    NORM_FLOOR,
    ComplexStructure,
    Metric,
    act_on_form,
    act_on_sym,
    as_metric,
    contraction_bundle,
    form_norm,
    j_ops,
    multiple_of_metric,
    square,
    triple_contraction,
)


def is_weakly_einstein(R: np.ndarray, g, tol: float = DEFAULT_TOL) -> tuple[bool, float]:
    """trc R is a multiple of g."""
    g = as_metric(g)
    check = multiple_of_metric(triple_contraction(np.asarray(R, dtype=float), g), g, tol)
    return check.is_multiple, check.residual


def _trc_scale(trc: np.ndarray, g: Metric) -> float:
    return max(g.norm2(trc), np.sqrt(g.n), NORM_FLOOR)


def einstein_weyl_residual(bundle, g: Metric) -> float:
    """||6We + se|| / (3 max(||trc R||, ||g||)).

    In dimension four the traceless part of trc R is exactly (6We + se)/3, so
    this is on the same scale as the weakly Einstein residual.
    """
    e = bundle.einstein
    combo = 6.0 * act_on_sym(bundle.weyl, e, g) + bundle.scalar * e
    return g.norm2(combo) / (3.0 * _trc_scale(bundle.trc, g))


@dataclass(frozen=True)
class IdentityReport:
    n: int
    trw1_residual: float
    trw2_residual: float
    # the entries below only apply in dimension four (None otherwise)
    trf_residual: float | None = None
    trm_residual: float | None = None
    trcW_multiple_residual: float | None = None
    iff_consistency: bool | None = None


def identity_suite(R: np.ndarray, g, tol: float = DEFAULT_TOL) -> IdentityReport:
    """Residuals of the curvature identities that hold for every curvature tensor."""
    g = as_metric(g)
    n = g.n
    if n < 4:
        raise ValueError("identity_suite needs n >= 4")
    b = contraction_bundle(R, g)
    r, s = b.ricci, b.scalar
    Rr = act_on_sym(R, r, g)
    Wr = act_on_sym(b.weyl, r, g)
    r2 = square(r, g)
    trcW = triple_contraction(b.weyl, g)

    def leftover(combo):
        return multiple_of_metric(combo, g, tol).residual

    trw1 = (n - 2) ** 2 * (b.trc - trcW) + 2 * (2 * s * r - 2 * (n - 2) * Rr - n * r2)
    trw2 = (n - 2) * (Rr - Wr) + 2 * r2 - n * s * r / (n - 1)
    if n != 4:
        return IdentityReport(n, leftover(trw1), leftover(trw2))

    we, _ = multiple_of_metric(b.trc, g, tol)[:2]
    iff_rhs = bool(einstein_weyl_residual(b, g) <= tol)
    return IdentityReport(
        n,
        leftover(trw1),
        leftover(trw2),
        trf_residual=leftover(b.trc - 2 * Rr + s * r - 2 * r2),
        trm_residual=leftover(b.trc - 2 * Wr - s * r / 3),
        trcW_multiple_residual=leftover(trcW),
        iff_consistency=bool(we) == bool(iff_rhs),
    )


class SpectrumCheck(NamedTuple):
    spectrum_ok: bool
    a_value: float
    trq_residual: float | None
    rrr_applicable: bool


def kahler_spectrum_check(e: np.ndarray, g, tol: float = DEFAULT_TOL,
                          scalar: float = 0.0) -> SpectrumCheck:
    """Test whether a traceless e has spectrum (a, a, -a, -a) relative to g.

    With r = e + s g/4 the combination s r - 2 r^2 equals s^2 g/8 - 2 e^2, so
    its leftover after removing the g-part does not depend on ``scalar``.
    """
    g = as_metric(g)
    e = np.asarray(e, dtype=float)
    if g.n != 4:
        raise ValueError("kahler_spectrum_check needs n = 4")
    enorm = g.norm2(e)
    atol = tol * max(1.0, enorm)
    if abs(g.trace(e)) > atol:
        raise ValueError("e is not traceless")
    lam = np.linalg.eigvalsh(g.orthonormal2(0.5 * (e + e.T)))
    ok = (abs(lam[1] - lam[0]) <= atol and abs(lam[3] - lam[2]) <= atol
          and abs(lam[0] + lam[3]) <= atol)
    a_value = float((lam[2] + lam[3] - lam[0] - lam[1]) / 4.0)
    if not ok:
        return SpectrumCheck(False, a_value, None, False)
    r = e + scalar * g.g / 4.0
    trq = multiple_of_metric(scalar * r - 2.0 * square(r, g), g, tol).residual
    return SpectrumCheck(True, a_value, trq, True)


@dataclass(frozen=True)
class EquivReport:
    cond_a: bool
    cond_b: bool
    cond_c: bool
    cond_d: bool
    residual_a: float
    residual_b: float
    residual_c: float
    residual_d: float
    spectrum_ok: bool
    a_value: float
    ricci_hermitian: bool

    @property
    def conditions(self) -> tuple[bool, bool, bool, bool]:
        return (self.cond_a, self.cond_b, self.cond_c, self.cond_d)

    @property
    def agree(self) -> bool:
        return len(set(self.conditions)) == 1


def equiv_conditions(R: np.ndarray, g, J: ComplexStructure,
                     tol: float = DEFAULT_TOL) -> EquivReport:
    """Evaluate conditions (a)-(d) for a Kahler-type curvature tensor.

    (a) trc R is a multiple of g, (b) Rr is a multiple of g, (c) 6We = -se,
    (d) 3W eta = -s eta with eta = eJ.
    """
    g = as_metric(g)
    if g.n != 4 or J.n != 4:
        raise ValueError("equiv_conditions needs n = 4")
    if not J.is_hermitian_metric(g):
        raise ValueError("g is not Hermitian for J")
    R = np.asarray(R, dtype=float)
    b = contraction_bundle(R, g)
    scale = _trc_scale(b.trc, g)

    a_check = multiple_of_metric(b.trc, g, tol)
    b_check = multiple_of_metric(act_on_sym(R, b.ricci, g), g, tol)
    res_c = einstein_weyl_residual(b, g)
    eta = j_ops(b.einstein, J).aJ
    res_d = form_norm(3.0 * act_on_form(b.weyl, eta, g) + b.scalar * eta, g) / (3.0 * scale)

    spec = kahler_spectrum_check(b.einstein, g, max(tol, 1e-8), b.scalar)
    herm = j_ops(b.ricci, J, tol=max(tol, 1e-10)).is_hermitian
    return EquivReport(
        a_check.is_multiple, b_check.is_multiple, bool(res_c <= tol), bool(res_d <= tol),
        a_check.residual, b_check.residual, res_c, res_d,
        spec.spectrum_ok, spec.a_value, herm,
    )


# --------------------------------------------------------------------------
# Adapted-basis oracle for (d)
# --------------------------------------------------------------------------

def adapted_basis(e: np.ndarray, g, J: ComplexStructure) -> np.ndarray:
    """Orthonormal basis u, Ju, v, Jv (as columns) diagonalising e.

    u spans the top eigenvector of e, v the bottom one made orthogonal to
    u and Ju; eigenvector signs are fixed so the first nonzero canonical
    coordinate is positive.
    """
    g = as_metric(g)
    E = g.frame
    Jo = np.linalg.solve(E, J.J @ E)
    _, vecs = np.linalg.eigh(g.orthonormal2(0.5 * (e + e.T)))

    def canon(x):
        k = np.flatnonzero(np.abs(x) > 1e-12)[0]
        return x if x[k] > 0 else -x

    u = canon(vecs[:, -1])
    ju = Jo @ u
    v = vecs[:, 0] - (vecs[:, 0] @ u) * u - (vecs[:, 0] @ ju) * ju
    v = canon(v / np.linalg.norm(v))
    return E @ np.column_stack([u, ju, v, Jo @ v])


def adapted_components(T: np.ndarray, basis: np.ndarray) -> np.ndarray:
    return np.einsum("ijkl,ia,jb,kc,ld->abcd", T, basis, basis, basis, basis, optimize=True)


def basis_oracle(R: np.ndarray, g, J: ComplexStructure,
                 tol: float = DEFAULT_TOL) -> tuple[bool | None, float]:
    """Check (d) through Weyl components in the adapted basis.

    In that basis (d) says W_1212 = W_3434 = -s/12, W_1234 = s/4, and
    W_12ij = W_34ij = 0 for every other pair {i, j}.  Returns (None, 0.0)
    when e vanishes, since the adapted basis is then undefined.
    """
    g = as_metric(g)
    b = contraction_bundle(R, g)
    if g.norm2(b.einstein) <= 1e-8 * max(g.norm4(R), NORM_FLOOR):
        return None, 0.0
    W = adapted_components(b.weyl, adapted_basis(b.einstein, g, J))
    s = b.scalar
    target = np.zeros((2, 4, 4))
    target[0, 0, 1], target[0, 1, 0] = -s / 12, s / 12
    target[0, 2, 3], target[0, 3, 2] = s / 4, -s / 4
    target[1, 2, 3], target[1, 3, 2] = -s / 12, s / 12
    target[1, 0, 1], target[1, 1, 0] = s / 4, -s / 4
    got = np.stack([W[0, 1], W[2, 3]])
    dev = np.abs(got - target).max() / max(np.abs(W).max(), abs(s), NORM_FLOOR)
    return bool(dev <= tol), float(dev)
