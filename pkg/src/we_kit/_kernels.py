"""Hot numeric loops, each with a numba kernel and a pure-numpy twin.

The numba path is used when numba imports and ``WE_KIT_DISABLE_NUMBA`` is not
set to a truthy value.  Both paths run the same bisection, so their results
agree to within the bisection tolerance; ``tests/test_kernels.py`` pins that.
"""

from __future__ import annotations

import math
import os

import numpy as np

SQRT7 = 2.6457513110645905905016157536392604257102591830824501803683344592

_FLAG = os.environ.get("WE_KIT_DISABLE_NUMBA", "").strip().lower()
DISABLED_BY_ENV = _FLAG in {"1", "true", "yes", "on"}

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not DISABLED_BY_ENV
BACKEND = "numba" if USE_NUMBA else "numpy"


def _njit(fn):
    if not HAVE_NUMBA:
        return fn
    return numba.njit(cache=True)(fn)


# --------------------------------------------------------------------------
# F(x) = exp(-x cot c) sin x level matching
# --------------------------------------------------------------------------

def level_bisect_numpy(targets, lo, hi, cot_c, increasing, tol=1e-13, maxiter=200):
    """Solve exp(-x*cot_c)*sin(x) == target on [lo, hi] for every target.

    The function must be monotone on the bracket; ``increasing`` gives the
    direction.  Vectorised over targets, one bisection step for all at once.
    """
    targets = np.asarray(targets, dtype=float)
    a = np.full(targets.shape, float(lo))
    b = np.full(targets.shape, float(hi))
    for _ in range(maxiter):
        if np.all(b - a <= tol):
            break
        m = 0.5 * (a + b)
        fm = np.exp(-m * cot_c) * np.sin(m) - targets
        go_right = fm < 0.0 if increasing else fm > 0.0
        a = np.where(go_right, m, a)
        b = np.where(go_right, b, m)
    return 0.5 * (a + b)


@_njit
def _level_bisect_loop(targets, lo, hi, cot_c, increasing, tol, maxiter):
    out = np.empty(targets.shape[0])
    for i in range(targets.shape[0]):
        a = lo
        b = hi
        target = targets[i]
        for _ in range(maxiter):
            if b - a <= tol:
                break
            m = 0.5 * (a + b)
            fm = math.exp(-m * cot_c) * math.sin(m) - target
            if increasing:
                go_right = fm < 0.0
            else:
                go_right = fm > 0.0
            if go_right:
                a = m
            else:
                b = m
        out[i] = 0.5 * (a + b)
    return out


def level_bisect_numba(targets, lo, hi, cot_c, increasing, tol=1e-13, maxiter=200):
    flat = np.ascontiguousarray(np.asarray(targets, dtype=float).ravel())
    out = _level_bisect_loop(flat, float(lo), float(hi), float(cot_c),
                             bool(increasing), float(tol), int(maxiter))
    return out.reshape(np.shape(targets))


# --------------------------------------------------------------------------
# Roots of Q(t) = eps K (t-g)/2 + |t-g|^(1/2) [A cos(w log|t-g|) + B sin(...)]
# --------------------------------------------------------------------------

def _q_numpy(t, K, gamma, eps, A, B):
    s = t - gamma
    L = np.log(np.abs(s))
    w = 0.5 * SQRT7
    return 0.5 * eps * K * s + np.sqrt(np.abs(s)) * (A * np.cos(w * L) + B * np.sin(w * L))


def q_root_bisect_numpy(lo, hi, K, gamma, eps, A, B, tol=1e-12, maxiter=200):
    """Refine sign changes of Q bracketed by [lo, hi] (arrays) via bisection."""
    a = np.array(lo, dtype=float)
    b = np.array(hi, dtype=float)
    fa = _q_numpy(a, K, gamma, eps, A, B)
    for _ in range(maxiter):
        if np.all(b - a <= tol):
            break
        m = 0.5 * (a + b)
        fm = _q_numpy(m, K, gamma, eps, A, B)
        same = (fm < 0.0) == (fa < 0.0)
        a = np.where(same, m, a)
        fa = np.where(same, fm, fa)
        b = np.where(same, b, m)
    return 0.5 * (a + b)


@_njit
def _q_scalar(t, K, gamma, eps, A, B):
    s = t - gamma
    L = math.log(abs(s))
    w = 0.5 * 2.6457513110645906
    return 0.5 * eps * K * s + math.sqrt(abs(s)) * (A * math.cos(w * L) + B * math.sin(w * L))


@_njit
def _q_root_loop(lo, hi, K, gamma, eps, A, B, tol, maxiter):
    out = np.empty(lo.shape[0])
    for i in range(lo.shape[0]):
        a = lo[i]
        b = hi[i]
        fa = _q_scalar(a, K, gamma, eps, A, B)
        for _ in range(maxiter):
            if b - a <= tol:
                break
            m = 0.5 * (a + b)
            fm = _q_scalar(m, K, gamma, eps, A, B)
            if (fm < 0.0) == (fa < 0.0):
                a = m
                fa = fm
            else:
                b = m
        out[i] = 0.5 * (a + b)
    return out


def q_root_bisect_numba(lo, hi, K, gamma, eps, A, B, tol=1e-12, maxiter=200):
    lo = np.ascontiguousarray(np.asarray(lo, dtype=float).ravel())
    hi = np.ascontiguousarray(np.asarray(hi, dtype=float).ravel())
    return _q_root_loop(lo, hi, float(K), float(gamma), float(eps), float(A),
                        float(B), float(tol), int(maxiter))


# --------------------------------------------------------------------------
# Triple contraction  T_ij = sum_{kpq} X_ikpq Y_jkpq
# --------------------------------------------------------------------------

def contract3_numpy(X, Y):
    return np.einsum("ikpq,jkpq->ij", X, Y)


@_njit
def _contract3_loop(X, Y):
    n = X.shape[0]
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            acc = 0.0
            for k in range(n):
                for p in range(n):
                    for q in range(n):
                        acc += X[i, k, p, q] * Y[j, k, p, q]
            out[i, j] = acc
    return out


def contract3_numba(X, Y):
    return _contract3_loop(np.ascontiguousarray(X, dtype=float),
                           np.ascontiguousarray(Y, dtype=float))


if USE_NUMBA:
    level_bisect = level_bisect_numba
    q_root_bisect = q_root_bisect_numba
    contract3 = contract3_numba
else:
    level_bisect = level_bisect_numpy
    q_root_bisect = q_root_bisect_numpy
    contract3 = contract3_numpy
