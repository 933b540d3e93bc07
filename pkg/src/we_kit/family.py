"""A cohomogeneity-one Kahler frame family on R x (a 3-dim Lie group).

The frame e1..e4 has brackets [e1, .] = 0, [e2, e4] = 2p e3, [e2, e3] = q e4,
[e3, e4] = q e2, and the metric is diag(zeta eta, zeta, zeta eta, zeta) with
zeta = p (gamma - t) / theta.  Functions of t are differentiated along e1 by
d_{e1} f = 2 zeta eta theta f'(t); the other frame fields kill them.

Everything here is evaluated pointwise in t.  The closed-form connection and
curvature are cross-checked against the Koszul formula, against curvature
assembled from the connection by central differences, and (for eta coming from
a ``QSpec``) against a second route to the Ricci eigenvalues through Q alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

import numpy as np

from .conditions import EquivReport, equiv_conditions
from .examples import set_component
from .ode_q import QSpec, q_eval
from .tensors import ComplexStructure, Metric

# positively ordered frame for the Kahler orientation (e1, Je1, e2, Je2)
FAMILY_ORIENTATION = (0, 2, 1, 3)
FAMILY_J = ComplexStructure.from_pairs(4, [(0, 2), (1, 3)])


# --------------------------------------------------------------------------
# eta profiles: callables t -> (eta, eta', eta'')
# --------------------------------------------------------------------------

class EtaProfile(Protocol):
    def __call__(self, t: float) -> tuple[float, float, float]: ...


@dataclass(frozen=True)
class ConstantEta:
    value: float

    def __call__(self, t: float) -> tuple[float, float, float]:
        return float(self.value), 0.0, 0.0


@dataclass(frozen=True)
class PolynomialEta:
    """eta(t) = sum c_k t^k, lowest degree first."""

    coeffs: tuple[float, ...]

    def __call__(self, t: float) -> tuple[float, float, float]:
        P = np.polynomial.Polynomial(self.coeffs)
        return float(P(t)), float(P.deriv(1)(t)), float(P.deriv(2)(t))


@dataclass(frozen=True)
class QSpecEta:
    """eta = Q / (4 p theta (gamma - t)), i.e. Q = 4 zeta eta theta^2."""

    qspec: QSpec
    p: float
    theta: float

    def __call__(self, t: float) -> tuple[float, float, float]:
        Q, Q1, Q2 = q_eval(self.qspec, t)
        Z = 4.0 * self.p * self.theta * (self.qspec.gamma - t)
        Z1 = -4.0 * self.p * self.theta
        eta = Q / Z
        eta1 = (Q1 - Z1 * eta) / Z
        eta2 = (Q2 - 2.0 * Z1 * eta1) / Z
        return eta, eta1, eta2


# --------------------------------------------------------------------------
# Parameters
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FamilyParams:
    p: float
    q: float
    theta: float
    gamma: float
    eta_fn: EtaProfile = field(compare=False)
    # optional working interval, validated on construction
    interval: tuple[float, float] | None = None
    qspec: QSpec | None = None

    def __post_init__(self):
        for name in ("p", "q", "theta"):
            if getattr(self, name) == 0:
                raise ValueError(f"{name} must be nonzero")
        if self.interval is not None:
            self.check_interval(*self.interval)

    @classmethod
    def from_qspec(cls, qspec: QSpec, p: float = 1.0, theta: float | None = None,
                   interval: tuple[float, float] | None = None) -> "FamilyParams":
        """Family whose Q is the closed form of ``qspec``.

        theta defaults to -eps/p, the sign choice that makes zeta and eta
        positive wherever Q is; q is then fixed by K = 4 eps q theta.
        """
        if qspec.K == 0:
            raise ValueError("K = 0 would force q = 0")
        if theta is None:
            theta = -qspec.eps / p
        q = qspec.K / (4.0 * qspec.eps * theta)
        return cls(p, q, theta, qspec.gamma, QSpecEta(qspec, p, theta), interval, qspec)

    def zeta(self, t: float) -> float:
        return self.p * (self.gamma - t) / self.theta

    def side(self, t: float) -> int:
        if t == self.gamma:
            raise ValueError("t = gamma is excluded")
        return 1 if t > self.gamma else -1

    def check_point(self, t: float) -> tuple[float, tuple[float, float, float]]:
        self.side(t)
        zeta = self.zeta(t)
        eta = self.eta_fn(t)
        if not zeta > 0:
            raise ValueError(f"zeta = {zeta} is not positive at t = {t}")
        if not eta[0] > 0:
            raise ValueError(f"eta = {eta[0]} is not positive at t = {t}")
        return zeta, eta

    def check_interval(self, t_min: float, t_max: float, samples: int = 257) -> None:
        if not t_min < t_max:
            raise ValueError("need t_min < t_max")
        if t_min <= self.gamma <= t_max:
            raise ValueError("working interval contains gamma")
        for t in np.linspace(t_min, t_max, samples):
            self.check_point(float(t))


# --------------------------------------------------------------------------
# Frame data
# --------------------------------------------------------------------------

def lie_brackets(p: float, q: float) -> np.ndarray:
    """C with [e_i, e_j] = C[i, j, m] e_m."""
    C = np.zeros((4, 4, 4))
    for (i, j, m), v in (((1, 3, 2), 2.0 * p), ((1, 2, 3), q), ((2, 3, 1), q)):
        C[i, j, m] = v
        C[j, i, m] = -v
    return C


def _metric_diag(zeta: float, eta: float) -> np.ndarray:
    return np.array([zeta * eta, zeta, zeta * eta, zeta])


def _connection(p: float, q: float, theta: float, zeta: float, eta: tuple) -> np.ndarray:
    """conn[i, j, m]: the e_m coefficient of nabla_{e_i} e_j."""
    e, e1, _ = eta
    P = -p * e + zeta * e1 * theta  # (zeta eta)' theta, using zeta' theta = -p
    G = np.zeros((4, 4, 4))
    G[0, 0, 0] = P
    G[0, 1, 1] = G[1, 0, 1] = -p * e
    G[0, 2, 2] = G[2, 0, 2] = P
    G[0, 3, 3] = G[3, 0, 3] = -p * e
    G[1, 1, 0] = p
    G[1, 2, 3] = -p * e
    G[1, 3, 2] = p
    G[2, 1, 3] = -(p * e + q)
    G[2, 2, 0] = -P
    G[2, 3, 1] = p * e + q
    G[3, 1, 2] = -p
    G[3, 2, 1] = p * e
    G[3, 3, 0] = p
    return G


def _curvature(p: float, q: float, theta: float, zeta: float, eta: tuple) -> np.ndarray:
    e, e1, e2 = eta
    a = p * zeta ** 2 * e * e1 * theta
    dP = -2.0 * p * e1 + theta * zeta * e2  # [(zeta eta)' theta]'
    R = np.zeros((4, 4, 4, 4))
    for idx in ((0, 1, 0, 1), (0, 1, 2, 3), (0, 3, 0, 3), (0, 3, 1, 2), (1, 2, 1, 2), (2, 3, 2, 3)):
        set_component(R, *idx, a)
    set_component(R, 0, 2, 0, 2, -2.0 * dP * zeta ** 2 * e ** 2 * theta)
    set_component(R, 0, 2, 1, 3, 2.0 * a)
    set_component(R, 1, 3, 1, 3, -2.0 * p * (2.0 * p * e + q) * zeta)
    return R


def _ricci(p: float, q: float, theta: float, zeta: float, eta: tuple) -> np.ndarray:
    e, e1, e2 = eta
    r11 = 2.0 * (3.0 * p * e1 - zeta * theta * e2) * zeta * e * theta
    r22 = 2.0 * p * zeta * e1 * theta - 2.0 * p * (2.0 * p * e + q)
    return np.diag([r11, r22, r11, r22])


@dataclass(frozen=True, eq=False)
class FramePoint:
    t: float
    g: Metric
    J: ComplexStructure
    conn: np.ndarray
    R: np.ndarray
    ricci: np.ndarray
    mu: float
    lam: float
    Q: float
    zeta: float
    eta: float


def frame_point(params: FamilyParams, t: float) -> FramePoint:
    zeta, eta = params.check_point(t)
    args = (params.p, params.q, params.theta, zeta, eta)
    gd = _metric_diag(zeta, eta[0])
    ric = _ricci(*args)
    return FramePoint(
        t=float(t), g=Metric(np.diag(gd)), J=FAMILY_J,
        conn=_connection(*args), R=_curvature(*args), ricci=ric,
        mu=float(ric[0, 0] / gd[0]), lam=float(ric[1, 1] / gd[1]),
        Q=4.0 * zeta * eta[0] * params.theta ** 2, zeta=zeta, eta=eta[0],
    )


def koszul_connection(params: FamilyParams, t: float,
                      brackets: np.ndarray | None = None) -> np.ndarray:
    """Levi-Civita coefficients from the Koszul formula, metric derivatives
    taken analytically and converted to e1-derivatives."""
    zeta, eta = params.check_point(t)
    C = lie_brackets(params.p, params.q) if brackets is None else np.asarray(brackets)
    g = np.diag(_metric_diag(zeta, eta[0]))
    zeta1 = -params.p / params.theta
    d_t = np.array([zeta1 * eta[0] + zeta * eta[1], zeta1] * 2)
    dg = np.zeros((4, 4, 4))  # dg[i, j, k] = e_i g(e_j, e_k)
    dg[0] = np.diag(2.0 * zeta * eta[0] * params.theta * d_t)
    Cg = np.einsum("ijm,mk->ijk", C, g)  # g([e_i, e_j], e_k)
    # X.transpose(1, 2, 0)[i, j, k] = X[k, i, j]; (2, 0, 1) gives X[j, k, i]
    low = 0.5 * (dg + dg.transpose(1, 0, 2) - dg.transpose(1, 2, 0)
                 + Cg - Cg.transpose(2, 0, 1) + Cg.transpose(1, 2, 0))
    return np.einsum("ijk,km->ijm", low, np.linalg.inv(g))


def koszul_check(params: FamilyParams, t: float, brackets: np.ndarray | None = None) -> float:
    """Max |Koszul - closed form| over connection coefficients.

    ``brackets`` replaces the structure constants on the Koszul side only,
    which is how a wrong bracket table is detected.
    """
    fp = frame_point(params, t)
    return float(np.abs(koszul_connection(params, t, brackets) - fp.conn).max())


def curvature_from_connection_tensor(params: FamilyParams, t: float,
                                     h: float | None = None) -> np.ndarray:
    """R_ijkl = g(R(e_i, e_j) e_k, e_l) with
    R(v, w) u = nabla_[v,w] u + nabla_w nabla_v u - nabla_v nabla_w u,
    the e1-derivative of the connection by central differences in t."""
    zeta, eta = params.check_point(t)
    if h is None:
        h = 1e-5 * max(1.0, abs(t - params.gamma))
    G = _connection(params.p, params.q, params.theta, zeta, eta)
    Gp = _connection(params.p, params.q, params.theta, *params.check_point(t + h))
    Gm = _connection(params.p, params.q, params.theta, *params.check_point(t - h))
    dG = np.zeros((4, 4, 4, 4))  # dG[a, j, k, m] = e_a(G[j, k, m])
    dG[0] = 2.0 * zeta * eta[0] * params.theta * (Gp - Gm) / (2.0 * h)
    C = lie_brackets(params.p, params.q)
    # nabla_a nabla_b e_k = e_a(G[b,k,m]) e_m + G[b,k,m] G[a,m,l] e_l
    nn = dG + np.einsum("bkm,aml->abkl", G, G)
    vec = np.einsum("ijc,ckl->ijkl", C, G) + nn.transpose(1, 0, 2, 3) - nn
    g = np.diag(_metric_diag(zeta, eta[0]))
    return np.einsum("ijkm,ml->ijkl", vec, g)


def curvature_from_connection(params: FamilyParams, t: float, h: float | None = None) -> float:
    """Max |finite-difference curvature - closed-form curvature|."""
    fp = frame_point(params, t)
    return float(np.abs(curvature_from_connection_tensor(params, t, h) - fp.R).max())


# --------------------------------------------------------------------------
# Weakly Einstein residuals and the Q-only Ricci route
# --------------------------------------------------------------------------

def _q_from_eta(params: FamilyParams, t: float) -> tuple[float, float, float]:
    eta = params.eta_fn(t)
    Z = 4.0 * params.p * params.theta * (params.gamma - t)
    Z1 = -4.0 * params.p * params.theta
    return Z * eta[0], Z1 * eta[0] + Z * eta[1], 2.0 * Z1 * eta[1] + Z * eta[2]


def we_residual(params: FamilyParams, qspec: QSpec | None, t: float) -> tuple[float, float]:
    """(umq_residual, einstein_residual) at t.

    umq: |s^2 Q'' + 2Q - 4 q theta s| / (1 + |Q|), s = t - gamma;
    einstein: |Q - eps K s / 2| / (1 + |Q|) with K = 4 eps q theta.
    With ``qspec`` None, Q and its derivatives come from the params' own eta.
    """
    eps = params.side(t)
    K = 4.0 * eps * params.q * params.theta
    s = t - params.gamma
    if qspec is None:
        Q, _, Q2 = _q_from_eta(params, t)
    else:
        if qspec.eps != eps:
            raise ValueError("qspec.eps differs from sign(t - gamma)")
        if qspec.gamma != params.gamma:
            raise ValueError("qspec.gamma differs from params.gamma")
        if abs(qspec.K - K) > 1e-12 * max(1.0, abs(K)):
            raise ValueError(f"qspec.K = {qspec.K} but 4 eps q theta = {K}")
        Q, _, Q2 = q_eval(qspec, t)
    if not Q > 0:
        raise ValueError(f"Q = {Q} is not positive at t = {t}")
    scale = 1.0 + abs(Q)
    umq = abs(s * s * Q2 + 2.0 * Q - 4.0 * params.q * params.theta * s) / scale
    ein = abs(Q - 0.5 * eps * K * s) / scale
    return float(umq), float(ein)


def ricci_eigs_potential_path(qspec: QSpec, t: float) -> tuple[float, float]:
    """(mu, lambda) from Q alone: Y = Q' + Q/s, mu = -Y'/2,
    lambda = (K - eps Y) / (2 eps s)."""
    s = t - qspec.gamma
    Q, Q1, Q2 = q_eval(qspec, t)
    if not Q > 0:
        raise ValueError(f"Q = {Q} is not positive at t = {t}")
    Y = Q1 + Q / s
    Y1 = Q2 + Q1 / s - Q / (s * s)
    return -0.5 * Y1, (qspec.K - qspec.eps * Y) / (2.0 * qspec.eps * s)


# --------------------------------------------------------------------------
# Scans
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FamilyRow:
    t: float
    Q: float
    mu: float
    lam: float
    umq_residual: float
    einstein_residual: float
    report: EquivReport

    def as_dict(self) -> dict:
        r = self.report
        return {
            "t": self.t, "Q": self.Q, "mu": self.mu, "lambda": self.lam,
            "umq_residual": self.umq_residual, "einstein_residual": self.einstein_residual,
            "cond_a": r.cond_a, "cond_b": r.cond_b, "cond_c": r.cond_c, "cond_d": r.cond_d,
        }


def family_row(params: FamilyParams, t: float, tol: float = 1e-8) -> FamilyRow:
    fp = frame_point(params, t)
    umq, ein = we_residual(params, params.qspec, t)
    return FamilyRow(fp.t, fp.Q, fp.mu, fp.lam, umq, ein, equiv_conditions(fp.R, fp.g, fp.J, tol))


def family_scan(params: FamilyParams, ts: Sequence[float], tol: float = 1e-8,
                mapper: Callable = map) -> list[FamilyRow]:
    """One row per t, in input order; ``mapper`` may be an executor's map."""
    return list(mapper(lambda t: family_row(params, float(t), tol), ts))


def positive_window(qspec: QSpec, lo: float, hi: float, count: int) -> np.ndarray:
    """``count`` points of [lo, hi] (log-spaced in |t - gamma|) where Q > 0."""
    side = 1.0 if lo > qspec.gamma else -1.0
    mags = np.geomspace(abs(lo - qspec.gamma), abs(hi - qspec.gamma), 8 * count)
    ts = qspec.gamma + side * mags
    ts = ts[q_eval(qspec, ts)[0] > 0]
    if ts.size < count:
        raise ValueError("Q is positive on too few sample points")
    idx = np.linspace(0, ts.size - 1, count).round().astype(int)
    return np.sort(ts[idx])


__all__ = [
    "FAMILY_J", "FAMILY_ORIENTATION", "ConstantEta", "PolynomialEta", "QSpecEta",
    "FamilyParams", "FramePoint", "FamilyRow", "lie_brackets", "frame_point",
    "koszul_connection", "koszul_check", "curvature_from_connection",
    "curvature_from_connection_tensor", "we_residual", "ricci_eigs_potential_path",
    "family_row", "family_scan", "positive_window",
]
