"""Dense tensor algebra at a single point of a Riemannian manifold.

Every stored tensor is fully covariant and expressed in an arbitrary (not
necessarily orthonormal) frame; the metric matrix travels with every call and
indices are raised explicitly with ``Metric.inv``.

Curvature sign convention: ``R[i, j, k, l] = g(R(e_i, e_j) e_k, e_l)`` with
``R(v, w) = nabla_[v,w] + nabla_w nabla_v - nabla_v nabla_w``, so that a
round sphere has ``R[0, 1, 0, 1] > 0`` and ``ricci[i, j] = g^{pq} R[i, p, j, q]``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import _kernels

DEFAULT_TOL = 1e-9
NORM_FLOOR = 1e-300


class TensorShapeError(ValueError):
    """Dimensions of the arguments do not fit together."""


@dataclass(frozen=True, eq=False)
class Metric:
    """Positive definite inner product on R^n, with cached inverse and frame.

    ``frame`` has g-orthonormal columns, so ``frame.T @ g @ frame == I``.
    """

    g: np.ndarray
    inv: np.ndarray = field(init=False, repr=False)
    frame: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        g = np.array(self.g, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] < 2:
            raise TensorShapeError(f"metric must be a square matrix of size >= 2, got {g.shape}")
        scale = max(np.abs(g).max(), NORM_FLOOR)
        if np.abs(g - g.T).max() > 1e-12 * scale:
            raise ValueError("metric matrix is not symmetric")
        g = 0.5 * (g + g.T)
        try:
            L = np.linalg.cholesky(g)
        except np.linalg.LinAlgError as exc:
            raise ValueError("metric matrix is not positive definite") from exc
        g.setflags(write=False)
        inv = np.linalg.inv(g)
        inv = 0.5 * (inv + inv.T)
        inv.setflags(write=False)
        frame = np.linalg.inv(L).T
        frame.setflags(write=False)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "inv", inv)
        object.__setattr__(self, "frame", frame)

    @classmethod
    def identity(cls, n: int) -> "Metric":
        return cls(np.eye(n))

    @classmethod
    def diagonal(cls, entries: Sequence[float]) -> "Metric":
        return cls(np.diag(np.asarray(entries, dtype=float)))

    @property
    def n(self) -> int:
        return self.g.shape[0]

    def raise2(self, a: np.ndarray) -> np.ndarray:
        """a^{ij} = g^{ip} g^{jq} a_pq."""
        return self.inv @ a @ self.inv

    def orthonormal2(self, a: np.ndarray) -> np.ndarray:
        return self.frame.T @ a @ self.frame

    def orthonormal4(self, R: np.ndarray) -> np.ndarray:
        E = self.frame
        return np.einsum("ijkl,ia,jb,kc,ld->abcd", R, E, E, E, E, optimize=True)

    def norm2(self, a: np.ndarray) -> float:
        """Frobenius norm of a covariant 2-tensor in a g-orthonormal frame."""
        return float(np.linalg.norm(self.orthonormal2(a)))

    def norm4(self, R: np.ndarray) -> float:
        return float(np.linalg.norm(self.orthonormal4(R)))

    def trace(self, a: np.ndarray) -> float:
        return float(np.einsum("ij,ij->", self.inv, a))


def as_metric(g) -> Metric:
    return g if isinstance(g, Metric) else Metric(g)


def _check_dims(n: int, **arrays: np.ndarray) -> None:
    for name, arr in arrays.items():
        arr = np.asarray(arr)
        if arr.shape != (n,) * arr.ndim:
            raise TensorShapeError(f"{name} has shape {arr.shape}, expected all axes of length {n}")


# --------------------------------------------------------------------------
# Algebraic curvature tensors
# --------------------------------------------------------------------------

class SymmetryResiduals(NamedTuple):
    antisymmetry: float
    pair: float
    bianchi: float

    def max(self) -> float:
        return max(self)


def bianchi_cycle(R: np.ndarray) -> np.ndarray:
    """R_ijkl + R_iklj + R_iljk."""
    return R + R.transpose(0, 2, 3, 1) + R.transpose(0, 3, 1, 2)


def curvature_symmetry_residuals(R: np.ndarray) -> SymmetryResiduals:
    """Max-abs violations of the curvature symmetries, relative to max|R|."""
    R = np.asarray(R, dtype=float)
    scale = max(np.abs(R).max(initial=0.0), NORM_FLOOR)
    anti = max(np.abs(R + R.transpose(1, 0, 2, 3)).max(), np.abs(R + R.transpose(0, 1, 3, 2)).max())
    pair = np.abs(R - R.transpose(2, 3, 0, 1)).max()
    bianchi = np.abs(bianchi_cycle(R)).max()
    return SymmetryResiduals(anti / scale, pair / scale, bianchi / scale)


def check_curvature(R: np.ndarray, tol: float = 1e-10) -> None:
    res = curvature_symmetry_residuals(R)
    if res.max() > tol:
        raise ValueError(f"not an algebraic curvature tensor: {res}")


def project_curvature(T: np.ndarray) -> np.ndarray:
    """Project an arbitrary rank-4 array onto algebraic curvature tensors."""
    T = np.asarray(T, dtype=float)
    T = 0.5 * (T - T.transpose(1, 0, 2, 3))
    T = 0.5 * (T - T.transpose(0, 1, 3, 2))
    T = 0.5 * (T + T.transpose(2, 3, 0, 1))
    # on Sym^2(Lambda^2) the Bianchi symmetrisation is the projection onto 4-forms
    return T - bianchi_cycle(T) / 3.0


def kulkarni_nomizu(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(a o b)_ijkl = a_ik b_jl + a_jl b_ik - a_il b_jk - a_jk b_il."""
    return (np.einsum("ik,jl->ijkl", a, b) + np.einsum("jl,ik->ijkl", a, b)
            - np.einsum("il,jk->ijkl", a, b) - np.einsum("jk,il->ijkl", a, b))


def ricci(R: np.ndarray, g: Metric) -> np.ndarray:
    return np.einsum("ipjq,pq->ij", R, g.inv)


def triple_contraction(R: np.ndarray, g: Metric) -> np.ndarray:
    """[trc R]_ij = R_ikpq R_j^{kpq}."""
    gi = g.inv
    raised = np.einsum("jabc,ka,pb,qc->jkpq", R, gi, gi, gi, optimize=True)
    return _kernels.contract3(R, raised)


def weyl(R: np.ndarray, g: Metric, ric: np.ndarray | None = None) -> np.ndarray:
    n = g.n
    if n < 4:
        raise ValueError("the Weyl tensor is only defined here for n >= 4")
    if ric is None:
        ric = ricci(R, g)
    s = g.trace(ric)
    G = g.g
    return (R - kulkarni_nomizu(G, ric) / (n - 2)
            + s / ((n - 1) * (n - 2)) * 0.5 * kulkarni_nomizu(G, G))


@dataclass(frozen=True, eq=False)
class ContractionBundle:
    ricci: np.ndarray
    scalar: float
    einstein: np.ndarray
    schouten: np.ndarray
    weyl: np.ndarray
    trc: np.ndarray


def contraction_bundle(R: np.ndarray, g, check: bool = True) -> ContractionBundle:
    """Ricci, scalar, Einstein, Schouten and Weyl tensors plus trc R."""
    g = as_metric(g)
    R = np.asarray(R, dtype=float)
    if R.ndim != 4:
        raise TensorShapeError(f"curvature tensor must have rank 4, got shape {R.shape}")
    _check_dims(g.n, R=R)
    if g.n < 4:
        raise ValueError("contraction_bundle needs n >= 4 (Weyl tensor)")
    if check:
        check_curvature(R)
    n = g.n
    ric = ricci(R, g)
    ric = 0.5 * (ric + ric.T)
    s = g.trace(ric)
    return ContractionBundle(
        ricci=ric,
        scalar=s,
        einstein=ric - s * g.g / n,
        schouten=ric - s * g.g / (2 * n - 2),
        weyl=weyl(R, g, ric),
        trc=triple_contraction(R, g),
    )


def act_on_sym(R: np.ndarray, b: np.ndarray, g) -> np.ndarray:
    """[Rb]_ij = R_ipjq b^{pq}."""
    g = as_metric(g)
    _check_dims(g.n, R=R, b=b)
    return np.einsum("ipjq,pq->ij", R, g.raise2(np.asarray(b, dtype=float)))


def act_on_form(R: np.ndarray, alpha: np.ndarray, g) -> np.ndarray:
    """[R alpha]_ij = R_ijpq alpha^{pq} / 2."""
    g = as_metric(g)
    _check_dims(g.n, R=R, alpha=alpha)
    return 0.5 * np.einsum("ijpq,pq->ij", R, g.raise2(np.asarray(alpha, dtype=float)))


def square(a: np.ndarray, g) -> np.ndarray:
    """b = a^2 with b_ij = a_ik a_j^k."""
    g = as_metric(g)
    a = np.asarray(a, dtype=float)
    _check_dims(g.n, a=a)
    return a @ g.inv @ a


class MultipleCheck(NamedTuple):
    is_multiple: bool
    factor: float
    residual: float


def multiple_of_metric(a: np.ndarray, g, tol: float = DEFAULT_TOL) -> MultipleCheck:
    """Decide whether a symmetric 2-tensor is a multiple of g.

    The residual is ||a - f g|| / max(||a||, ||g||, 1e-300) with f = tr_g(a)/n,
    measured in a g-orthonormal frame; the zero tensor is a multiple (f = 0).
    """
    g = as_metric(g)
    a = np.asarray(a, dtype=float)
    _check_dims(g.n, a=a)
    if tol <= 0:
        raise ValueError("tol must be positive")
    factor = g.trace(a) / g.n
    denom = max(g.norm2(a), np.sqrt(g.n), NORM_FLOOR)
    residual = g.norm2(a - factor * g.g) / denom
    return MultipleCheck(bool(residual <= tol), float(factor), float(residual))


# --------------------------------------------------------------------------
# Complex structures
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ComplexStructure:
    """Endomorphism J with J^2 = -Id; columns are the images J e_i."""

    J: np.ndarray

    def __post_init__(self):
        J = np.array(self.J, dtype=float)
        n = J.shape[0]
        if J.shape != (n, n) or n % 2:
            raise TensorShapeError(f"J must be a square matrix of even size, got {J.shape}")
        if np.abs(J @ J + np.eye(n)).max() > 1e-12 * max(1.0, np.abs(J).max() ** 2):
            raise ValueError("J does not square to -Id")
        J.setflags(write=False)
        object.__setattr__(self, "J", J)

    @classmethod
    def from_pairs(cls, n: int, pairs: Sequence[tuple[int, int]]) -> "ComplexStructure":
        """J e_a = e_b and J e_b = -e_a for every (a, b) in pairs."""
        J = np.zeros((n, n))
        for a, b in pairs:
            J[b, a] = 1.0
            J[a, b] = -1.0
        return cls(J)

    @property
    def n(self) -> int:
        return self.J.shape[0]

    def is_hermitian_metric(self, g, tol: float = 1e-12) -> bool:
        """True when J is a g-isometry, i.e. g(J., J.) = g."""
        g = as_metric(g)
        return bool(np.abs(self.J.T @ g.g @ self.J - g.g).max()
                    <= tol * max(np.abs(g.g).max(), NORM_FLOOR))

    def kahler_form(self, g) -> np.ndarray:
        return j_ops(as_metric(g).g, self).aJ


class JOps(NamedTuple):
    aJ: np.ndarray
    Ja: np.ndarray
    commutator: np.ndarray
    is_hermitian: bool


def j_ops(a: np.ndarray, J: ComplexStructure, tol: float = DEFAULT_TOL) -> JOps:
    """aJ = a(J., .), Ja = -a(., J.) and their commutator [a, J] = aJ - Ja."""
    a = np.asarray(a, dtype=float)
    _check_dims(J.n, a=a)
    aJ = J.J.T @ a
    Ja = -a @ J.J
    comm = aJ - Ja
    scale = max(np.abs(a).max(initial=0.0), NORM_FLOOR)
    symmetric = np.abs(a - a.T).max() <= tol * scale
    hermitian = bool(symmetric and np.abs(comm).max() <= tol * scale)
    return JOps(aJ, Ja, comm, hermitian)


# --------------------------------------------------------------------------
# Hodge star on 2-forms in dimension four
# --------------------------------------------------------------------------

def levi_civita_symbol(n: int) -> np.ndarray:
    eps = np.zeros((n,) * n)
    for perm in itertools.permutations(range(n)):
        inversions = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        eps[perm] = -1.0 if inversions % 2 else 1.0
    return eps


_EPS4 = levi_civita_symbol(4)


def _orientation_sign(orientation, n: int) -> float:
    if orientation is None:
        return 1.0
    arr = np.asarray(orientation)
    if arr.ndim == 1:
        if sorted(arr.tolist()) != list(range(n)):
            raise ValueError(f"index orientation must be a permutation of 0..{n - 1}")
        arr = np.eye(n)[:, arr]
    arr = np.asarray(arr, dtype=float)
    if arr.shape != (n, n):
        raise TensorShapeError(f"orientation frame must be {n}x{n}, got {arr.shape}")
    det = np.linalg.det(arr)
    scale = np.prod(np.linalg.norm(arr, axis=0))
    if scale == 0.0 or abs(det) <= 1e-12 * scale:
        raise ValueError("orientation frame is degenerate")
    return float(np.sign(det))


def hodge_star(alpha: np.ndarray, g, orientation=None) -> np.ndarray:
    """Hodge star of a 2-form for the metric g and an orientation.

    ``orientation`` is either an index permutation such as ``(0, 2, 1, 3)``
    (meaning the frame e1, e3, e2, e4 is positive) or a matrix whose columns
    form a positively ordered basis; ``None`` means e1..e4 is positive.
    """
    g = as_metric(g)
    if g.n != 4:
        raise ValueError("the Hodge split of 2-forms is implemented for n = 4 only")
    _check_dims(4, alpha=alpha)
    sign = _orientation_sign(orientation, 4)
    vol = sign * np.sqrt(np.linalg.det(g.g)) * _EPS4
    return 0.5 * np.einsum("ijkl,kl->ij", vol, g.raise2(np.asarray(alpha, dtype=float)))


def hodge_split(alpha: np.ndarray, g, orientation=None) -> tuple[np.ndarray, np.ndarray]:
    """Return (self-dual part, anti-self-dual part) of a 2-form."""
    alpha = np.asarray(alpha, dtype=float)
    star = hodge_star(alpha, g, orientation)
    return 0.5 * (alpha + star), 0.5 * (alpha - star)


def form_inner(alpha: np.ndarray, beta: np.ndarray, g) -> float:
    """<alpha, beta> = alpha_ij beta^ij / 2, so that |e^1 ^ e^2| = 1."""
    g = as_metric(g)
    return 0.5 * float(np.einsum("ij,ij->", alpha, g.raise2(np.asarray(beta, dtype=float))))


def form_norm(alpha: np.ndarray, g) -> float:
    return float(np.sqrt(max(form_inner(alpha, alpha, g), 0.0)))


def wedge(xi: np.ndarray, zeta: np.ndarray) -> np.ndarray:
    """[xi ^ zeta]_pq = xi_p zeta_q - xi_q zeta_p."""
    return np.outer(xi, zeta) - np.outer(zeta, xi)
