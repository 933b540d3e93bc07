"""The level-matching map of F(x) = exp(-x cot c) sin x, c = arctan sqrt7.

F rises on [0, c] and falls on [c, pi], so each value taken on one side is
taken exactly once on the other; beta pairs the two points.  The checks here
show numerically that beta' < -1 on [0, c), which rules out a positive
interval of Q with zero ends and opposite slopes, and they run the matching
search directly over Q data as a second, independent route to that fact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _kernels
from ._kernels import SQRT7
from .ode_q import QSpec, boundary_match, positivity_scan, q_eval, slope_mismatch

C = math.atan(SQRT7)
COT_C = 1.0 / SQRT7
SIN_C = math.sin(C)
NEAR_C = 1e-6
"""Within this distance of c, beta'(alpha) is reported as exactly -1."""

QUOTED = {
    "c": 1.209429,
    "three_c_minus_pi": 0.4867,
    "second_derivative_ratio": 1.169,
    "alpha0": 0.3017,
    "beta_alpha0": 2.418858,
    "beta_prime_alpha0": -1.8755,
}


def f_eval(alpha, order: int = 0):
    """F^(order)(alpha) = (-1)^q exp(-alpha cot c) sin(alpha - q c) / sin(c)^q."""
    if not 0 <= order <= 4:
        raise ValueError("order must be in 0..4")
    a = np.asarray(alpha, dtype=float)
    val = (-1.0) ** order * np.exp(-a * COT_C) * np.sin(a - order * C) / SIN_C ** order
    return float(val) if val.ndim == 0 else val


def _level(targets, rising: bool) -> np.ndarray:
    lo, hi = (0.0, C) if rising else (C, math.pi)
    return _kernels.level_bisect(np.asarray(targets, dtype=float), lo, hi, COT_C, rising)


def beta(alpha):
    """The partner of alpha in [0, pi] with F(beta) = F(alpha); beta(c) = c."""
    a = np.atleast_1d(np.asarray(alpha, dtype=float))
    if np.any((a < 0) | (a > math.pi)):
        raise ValueError("alpha must lie in [0, pi]")
    out = np.full(a.shape, C)
    left, right = a < C, a > C
    out[left] = _level(f_eval(a[left]), rising=False)
    out[right] = _level(f_eval(a[right]), rising=True)
    return float(out[0]) if np.ndim(alpha) == 0 else out


def _beta_prime_values(alpha: np.ndarray, beta_vals: np.ndarray) -> np.ndarray:
    out = np.full(alpha.shape, -1.0)
    far = np.abs(alpha - C) >= NEAR_C
    out[far] = f_eval(alpha[far], 1) / f_eval(beta_vals[far], 1)
    return out


@dataclass(frozen=True, eq=False)
class BetaMap:
    c: float
    grid: np.ndarray
    beta_values: np.ndarray
    beta_prime_values: np.ndarray

    def level_residual(self) -> float:
        return float(np.abs(f_eval(self.grid) - f_eval(self.beta_values)).max())

    def __call__(self, alpha):
        return beta(alpha)


def beta_build(samples: int = 1000) -> BetaMap:
    """Tabulate beta on a uniform grid of [0, pi] (plus c itself)."""
    if samples < 1000:
        raise ValueError("samples must be at least 1000")
    grid = np.unique(np.append(np.linspace(0.0, math.pi, samples), C))
    b = beta(grid)
    if not np.all(np.diff(b) < 0):
        raise RuntimeError("beta is not strictly decreasing on the grid")
    if abs(b[0] - math.pi) > 1e-9 or abs(b[grid == C][0] - C) > 1e-12:
        raise RuntimeError("beta endpoint values are off")
    bmap = BetaMap(C, grid, b, _beta_prime_values(grid, b))
    if bmap.level_residual() > 1e-10:
        raise RuntimeError("F(alpha) != F(beta(alpha)) on the grid")
    return bmap


def beta_prime(bmap: BetaMap | None, alpha: float) -> float:
    """beta'(alpha) = F'(alpha) / F'(beta(alpha)) for alpha in [0, c]; -1 at c."""
    c = C if bmap is None else bmap.c
    if alpha < 0 or alpha > c:
        raise ValueError("beta_prime is defined here for alpha in [0, c]")
    if c - alpha < NEAR_C:
        return -1.0
    return float(f_eval(alpha, 1) / f_eval(beta(alpha), 1))


def alpha_zero() -> float:
    """The point of [0, c) at the level F(2c)."""
    return float(_level([f_eval(2.0 * C)], rising=True)[0])


# --------------------------------------------------------------------------
# Verification report
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Check:
    name: str
    value: float | bool
    expected: float | bool | None
    tol: float | None
    passed: bool

    def as_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "expected": self.expected,
                "tol": self.tol, "pass": self.passed}


def near(name: str, value: float, expected: float, tol: float) -> Check:
    return Check(name, float(value), float(expected), tol, bool(abs(value - expected) <= tol))


def holds(name: str, value: bool) -> Check:
    return Check(name, bool(value), True, None, bool(value))


@dataclass(frozen=True)
class LemmaReport:
    checks: list[Check]
    max_beta_prime: float
    verdict: bool
    constants: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]


def second_derivative_ratio() -> float:
    """2 exp(c cot c) cos c, the closed form of F''(0)/F''(c)."""
    return 2.0 * math.exp(C * COT_C) * math.cos(C)


def max_beta_prime(grid: int, margin: float) -> float:
    alpha = np.linspace(0.0, C - margin, grid)
    return float(np.max(_beta_prime_values(alpha, beta(alpha))))


def verify_lemma(grid: int = 100_000, margin: float = 1e-3, seed: int = 0) -> LemmaReport:
    if grid < 10_000:
        raise ValueError("grid must be at least 10^4")
    if not 0 < margin < C:
        raise ValueError("margin must lie in (0, c)")
    a0 = alpha_zero()
    ratio = second_derivative_ratio()
    quotient = f_eval(0.0, 2) / f_eval(C, 2)
    mx = max_beta_prime(grid, margin)
    rng = np.random.default_rng(seed)
    xs = rng.uniform(-2 * math.pi, 2 * math.pi, 100)
    period_dev = np.abs(f_eval(xs + math.pi) + math.exp(-math.pi * COT_C) * f_eval(xs)).max()

    checks = [
        near("c", C, QUOTED["c"], 1e-5),
        near("three_c_minus_pi", 3 * C - math.pi, QUOTED["three_c_minus_pi"], 1e-3),
        holds("three_c_minus_pi_in_open_quarter_pi", 0.0 < 3 * C - math.pi < math.pi / 4),
        near("second_derivative_ratio_quoted", ratio, QUOTED["second_derivative_ratio"], 1e-3),
        near("second_derivative_ratio_vs_quotient", ratio, quotient, 1e-12),
        holds("second_derivative_ratio_exceeds_one", ratio > 1.0),
        near("beta_0", beta(0.0), math.pi, 1e-9),
        near("beta_c", beta(C), C, 0.0),
        near("alpha0", a0, QUOTED["alpha0"], 1e-3),
        near("beta_alpha0", beta(a0), QUOTED["beta_alpha0"], 1e-4),
        near("beta_alpha0_vs_2c", beta(a0), 2 * C, 1e-10),
        near("beta_prime_alpha0", beta_prime(None, a0), QUOTED["beta_prime_alpha0"], 1e-3),
        near("beta_prime_0", beta_prime(None, 0.0), -math.exp(math.pi * COT_C), 1e-9),
        near("beta_prime_c", beta_prime(None, C), -1.0, 0.0),
        Check("max_beta_prime_below_minus_one", mx, -1.0, None, bool(mx < -1.0)),
        near("periodicity_deviation", float(period_dev), 0.0, 1e-12),
    ]
    consts = {"c": C, "cot_c": COT_C, "three_c_minus_pi": 3 * C - math.pi,
              "second_derivative_ratio": ratio, "alpha0": a0, "beta_alpha0": beta(a0),
              "beta_prime_alpha0": beta_prime(None, a0), "beta_prime_0": beta_prime(None, 0.0)}
    return LemmaReport(checks, mx, bool(mx < -1.0), consts)


# --------------------------------------------------------------------------
# From Q data to F data
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FReduction:
    delta: int
    p_amp: float
    q_phase: float
    roundtrip_residual: float


def reduce_to_F(qspec: QSpec, side: int | None = None,
                theta_grid: np.ndarray | None = None) -> FReduction:
    """Rewrite Q in x = log|t - gamma| / 2 as
    2 exp(-x) Q = delta eps K exp(x) + p sin(sqrt7 (x - q)),  delta = sign(t - gamma).
    """
    if qspec.is_einstein:
        raise ValueError("A = B = 0 has no oscillatory part")
    delta = qspec.eps if side is None else side
    if delta not in (1, -1):
        raise ValueError("side must be +1 or -1")
    p_amp = 2.0 * math.hypot(qspec.A, qspec.B)
    q_phase = math.atan2(-qspec.A, qspec.B) / SQRT7
    x = np.linspace(-4.0, 4.0, 401) if theta_grid is None else np.asarray(theta_grid, float)
    t = qspec.gamma + delta * np.exp(2.0 * x)
    lhs = 2.0 * np.exp(-x) * q_eval(qspec, t)[0]
    rhs = delta * qspec.eps * qspec.K * np.exp(x) + p_amp * np.sin(SQRT7 * (x - q_phase))
    res = float(np.max(np.abs(lhs - rhs) / (1.0 + np.abs(rhs))))
    return FReduction(int(delta), p_amp, q_phase, res)


# --------------------------------------------------------------------------
# Direct sweep over Q data
# --------------------------------------------------------------------------

LOG_PERIOD = 4.0 * math.pi / SQRT7
"""Period of the oscillatory part of Q in log|t - gamma|."""


@dataclass(frozen=True)
class SweepRow:
    K: float
    side: int
    eps: int
    phase_index: int
    phase: float
    intervals: int
    closed_intervals: int
    matches: int
    min_mismatch: float
    roundtrip_residual: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def sweep_window(periods: float = 3.0, center: float = 4.0) -> tuple[float, float]:
    """|t - gamma| range covering ``periods`` oscillations around ``center``.

    With |A, B| = 1 and |K| = 1 the linear and oscillatory parts balance near
    |t - gamma| = 4, which is where positivity intervals with two zero ends live.
    """
    half = 0.5 * periods * LOG_PERIOD
    return center * math.exp(-half), center * math.exp(half)


def sweep_row(K: float, side: int, phase_index: int, phases: int, gamma: float = 0.0,
              periods: float = 3.0, grid: int = 4000, tol: float = 1e-6) -> SweepRow:
    phi = 2.0 * math.pi * phase_index / phases
    qs = QSpec(K, gamma, side, math.cos(phi), math.sin(phi))
    lo, hi = sweep_window(periods)
    t_lo, t_hi = sorted((gamma + side * lo, gamma + side * hi))
    intervals = positivity_scan(qs, t_lo, t_hi, grid)
    closed = [iv for iv in intervals if iv.closed_by_zeros]
    matches = sum(boundary_match(iv, tol) for iv in closed)
    mism = min((slope_mismatch(iv) for iv in closed), default=math.inf)
    return SweepRow(float(K), side, side, phase_index, phi, len(intervals), len(closed),
                    int(matches), float(mism), reduce_to_F(qs).roundtrip_residual)


@dataclass(frozen=True)
class SweepReport:
    rows: list[SweepRow]
    tol: float

    @property
    def counterexamples(self) -> int:
        return sum(r.matches for r in self.rows)

    @property
    def closed_intervals(self) -> int:
        return sum(r.closed_intervals for r in self.rows)

    @property
    def max_roundtrip(self) -> float:
        return max(r.roundtrip_residual for r in self.rows)

    @property
    def min_mismatch(self) -> float:
        return min(r.min_mismatch for r in self.rows)


def nonrealizability_sweep(phases: int = 360, Ks=(-1.0, 1.0), sides=(1, -1),
                           gamma: float = 0.0, periods: float = 3.0, grid: int = 4000,
                           tol: float = 1e-6, mapper: Callable = map) -> SweepReport:
    """Scan unit (A, B) phases, K values and both sides of gamma (eps = side)."""
    jobs = [(K, s, k) for K in Ks for s in sides for k in range(phases)]
    rows = list(mapper(lambda j: sweep_row(j[0], j[1], j[2], phases, gamma, periods, grid, tol),
                       jobs))
    return SweepReport(rows, tol)
