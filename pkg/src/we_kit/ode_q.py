"""Closed-form solutions of the Euler equation s^2 Q'' + 2Q = eps K s
(s = t - gamma), positivity intervals of Q, and their endpoint slopes."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Literal

import numpy as np

from . import _kernels
from ._kernels import SQRT7

OMEGA = 0.5 * SQRT7
"""Angular frequency of the oscillatory solutions in log|t - gamma|."""

BoundaryKind = Literal["zero", "blowup", "domain_edge"]


@dataclass(frozen=True)
class QSpec:
    """Q = eps K s/2 + |s|^(1/2) (A cos(w log|s|) + B sin(w log|s|)), w = sqrt7/2."""

    K: float
    gamma: float
    eps: int
    A: float = 0.0
    B: float = 0.0

    def __post_init__(self):
        if self.eps not in (1, -1):
            raise ValueError(f"eps must be +1 or -1, got {self.eps!r}")
        for name in ("K", "gamma", "A", "B"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def is_einstein(self) -> bool:
        return self.A == 0.0 and self.B == 0.0

    def scaled(self, c: float) -> "QSpec":
        """Multiply (K, A, B) by c, which multiplies Q pointwise by c."""
        return replace(self, K=c * self.K, A=c * self.A, B=c * self.B)


def _offset(qspec: QSpec, t) -> np.ndarray:
    s = np.asarray(t, dtype=float) - qspec.gamma
    if np.any(s == 0.0):
        raise ValueError("Q is singular at t = gamma")
    return s


def q_eval(qspec: QSpec, t):
    """Return (Q, Q', Q'') at t; scalar in, floats out, arrays broadcast."""
    s = _offset(qspec, t)
    a = np.abs(s)
    L = np.log(a)
    c, sn = np.cos(OMEGA * L), np.sin(OMEGA * L)
    f = qspec.A * c + qspec.B * sn
    fL = OMEGA * (qspec.B * c - qspec.A * sn)
    fLL = -OMEGA * OMEGA * f
    root = np.sqrt(a)
    # chain rule for u = |s|^(1/2) f(log|s|):
    #   u' = |s|^(1/2)/s (f/2 + f_L),   u'' = |s|^(-3/2) (f_LL - f/4)
    Q = 0.5 * qspec.eps * qspec.K * s + root * f
    Q1 = 0.5 * qspec.eps * qspec.K + root / s * (0.5 * f + fL)
    Q2 = (fLL - 0.25 * f) / (a * root)
    if np.ndim(Q) == 0:
        return float(Q), float(Q1), float(Q2)
    return Q, Q1, Q2


def ode_residual(qspec: QSpec, t):
    """|s^2 Q'' + 2Q - eps K s| / (1 + |Q|)."""
    s = _offset(qspec, t)
    Q, _, Q2 = q_eval(qspec, t)
    res = np.abs(s * s * Q2 + 2.0 * np.asarray(Q) - qspec.eps * qspec.K * s) / (1.0 + np.abs(Q))
    return float(res) if np.ndim(res) == 0 else res


def ode_residual_fd(qspec: QSpec, t: float, h: float | None = None) -> float:
    """Same residual with Q'' from a central difference of the analytic Q'."""
    s = float(_offset(qspec, t))
    if h is None:
        h = 1e-5 * abs(s)
    _, q1p, _ = q_eval(qspec, t + h)
    _, q1m, _ = q_eval(qspec, t - h)
    Q = q_eval(qspec, t)[0]
    q2 = (q1p - q1m) / (2.0 * h)
    return abs(s * s * q2 + 2.0 * Q - qspec.eps * qspec.K * s) / (1.0 + abs(Q))


@dataclass(frozen=True)
class PositivityInterval:
    lo: float
    hi: float
    q_lo_slope: float
    q_hi_slope: float
    lo_kind: BoundaryKind
    hi_kind: BoundaryKind

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("interval needs lo < hi")

    @property
    def closed_by_zeros(self) -> bool:
        return self.lo_kind == "zero" and self.hi_kind == "zero"


def _grid(qspec: QSpec, t_lo: float, t_hi: float, grid: int) -> np.ndarray:
    """Log-spaced in |t - gamma|, since Q oscillates in log|t - gamma|."""
    d_lo, d_hi = abs(t_lo - qspec.gamma), abs(t_hi - qspec.gamma)
    mags = np.geomspace(min(d_lo, d_hi), max(d_lo, d_hi), grid)
    side = 1.0 if t_lo > qspec.gamma else -1.0
    ts = np.sort(qspec.gamma + side * mags)
    ts[0], ts[-1] = t_lo, t_hi
    return ts


def positivity_scan(qspec: QSpec, t_lo: float, t_hi: float, grid: int = 2000,
                    tol: float = 1e-12) -> list[PositivityInterval]:
    """Maximal subintervals of [t_lo, t_hi] on which Q > 0.

    Sign changes between grid samples are refined by bisection; a pair of
    roots closer together than the grid spacing (a near-tangent dip) can be
    missed, so ``grid`` should resolve the oscillation.  Since gamma must lie
    outside the range, Q stays finite and "blowup" ends never occur here.
    """
    if grid < 100:
        raise ValueError("grid must be at least 100")
    if not t_lo < t_hi:
        raise ValueError("need t_lo < t_hi")
    if t_lo <= qspec.gamma <= t_hi:
        raise ValueError("scan range must not contain gamma")

    ts = _grid(qspec, t_lo, t_hi, grid)
    Q = q_eval(qspec, ts)[0]
    pos = Q > 0.0
    flips = np.flatnonzero(pos[1:] != pos[:-1])
    roots = _kernels.q_root_bisect(ts[flips], ts[flips + 1], qspec.K, qspec.gamma,
                                   qspec.eps, qspec.A, qspec.B, tol=tol)
    roots = np.atleast_1d(np.asarray(roots, dtype=float))

    edges = [(t_lo, "domain_edge")] + [(float(r), "zero") for r in roots] + [(t_hi, "domain_edge")]
    out = []
    for (a, ka), (b, kb), inside in zip(edges[:-1], edges[1:], _segment_signs(pos, flips)):
        # slivers below the root resolution come from a root sitting on an edge
        if not inside or b - a <= tol:
            continue
        out.append(PositivityInterval(a, b, q_eval(qspec, a)[1], q_eval(qspec, b)[1], ka, kb))
    return out


def _segment_signs(pos: np.ndarray, flips: np.ndarray) -> list[bool]:
    starts = np.concatenate([[0], flips + 1])
    return [bool(pos[i]) for i in starts]


def boundary_match(interval: PositivityInterval, tol: float) -> bool:
    """True when the end slopes are opposite and nonzero: Q'(lo) = -Q'(hi) > 0."""
    if not interval.closed_by_zeros:
        raise ValueError("boundary_match needs zeros at both ends")
    lo, hi = interval.q_lo_slope, interval.q_hi_slope
    return bool(lo > 0.0 and abs(lo + hi) <= tol * abs(lo))


def slope_mismatch(interval: PositivityInterval) -> float:
    """|Q'(lo) + Q'(hi)| / |Q'(lo)|, the quantity boundary_match thresholds."""
    lo = interval.q_lo_slope
    return abs(lo + interval.q_hi_slope) / abs(lo) if lo != 0.0 else math.inf
