"""Concrete curvature tensors: space forms, surface products, the EPS space,
and random (optionally Kahler-type) algebraic curvature tensors."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .tensors import (
    ComplexStructure,
    Metric,
    check_curvature,
    kulkarni_nomizu,
    project_curvature,
)


@dataclass(frozen=True, eq=False)
class ExampleInstance:
    R: np.ndarray
    g: Metric
    J: ComplexStructure | None = None
    label: str = ""
    params: dict = field(default_factory=dict)
    # positively ordered frame, as accepted by tensors.hodge_star
    orientation: tuple[int, ...] | None = None

    def __post_init__(self):
        check_curvature(self.R, tol=1e-12)
        if self.J is not None and not self.J.is_hermitian_metric(self.g):
            raise ValueError("attached J is not g-orthogonal")


def set_sectional(R: np.ndarray, i: int, j: int, value: float) -> None:
    """Set R_ijij = value together with its three symmetry images."""
    R[i, j, i, j] = R[j, i, j, i] = value
    R[i, j, j, i] = R[j, i, i, j] = -value


def set_component(R: np.ndarray, i: int, j: int, k: int, l: int, value: float) -> None:
    """Set R_ijkl and every entry tied to it by antisymmetry and pair symmetry."""
    for (a, b, c, d), sign in (((i, j, k, l), 1), ((j, i, k, l), -1),
                               ((i, j, l, k), -1), ((j, i, l, k), 1)):
        R[a, b, c, d] = sign * value
        R[c, d, a, b] = sign * value


def constant_curvature(kappa: float, n: int = 4) -> ExampleInstance:
    if n < 2:
        raise ValueError("n must be at least 2")
    g = np.eye(n)
    R = kappa * 0.5 * kulkarni_nomizu(g, g)
    return ExampleInstance(R, Metric(g), label="constant_curvature",
                           params={"kappa": float(kappa), "n": n})


def product_surfaces(K1: float, K2: float) -> ExampleInstance:
    """Riemannian product of two surfaces with constant curvatures K1 and K2."""
    R = np.zeros((4, 4, 4, 4))
    set_sectional(R, 0, 1, K1)
    set_sectional(R, 2, 3, K2)
    J = ComplexStructure.from_pairs(4, [(0, 1), (2, 3)])
    return ExampleInstance(R, Metric.identity(4), J, label="product_surfaces",
                           params={"K1": float(K1), "K2": float(K2)},
                           orientation=(0, 1, 2, 3))


def eps_space(a: float) -> ExampleInstance:
    """Curvature of the locally homogeneous EPS example in its orthonormal frame.

    Only the curvature data is modelled; the Lie bracket constant ``b`` of the
    underlying group does not enter it.
    """
    if a == 0:
        raise ValueError("the EPS example needs a != 0")
    R = np.zeros((4, 4, 4, 4))
    a2 = float(a) ** 2
    for i, j in ((0, 1), (0, 2), (0, 3), (2, 3)):
        set_sectional(R, i, j, -a2)
    for i, j in ((1, 2), (1, 3)):
        set_sectional(R, i, j, a2)
    return ExampleInstance(R, Metric.identity(4), label="eps_space", params={"a": float(a)})


def random_curvature(seed: int, n: int = 4, scale: float = 1.0) -> np.ndarray:
    """Uniform random rank-4 array projected onto algebraic curvature tensors."""
    if n < 2:
        raise ValueError("n must be at least 2")
    rng = np.random.default_rng(seed)
    return project_curvature(rng.uniform(-scale, scale, size=(n,) * 4))


STANDARD_J = ComplexStructure.from_pairs(4, [(0, 1), (2, 3)])


@lru_cache(maxsize=None)
def _kahler_basis() -> np.ndarray:
    # Linear constraints on the 256 components: curvature symmetries plus
    # R(J., J., ., .) = R for the standard J; the null space is 9-dimensional.
    n = 4
    N = n ** 4
    I = np.eye(N).reshape((N,) + (n,) * 4)
    J = STANDARD_J.J
    rows = [
        I + I.transpose(0, 2, 1, 3, 4),
        I + I.transpose(0, 1, 2, 4, 3),
        I - I.transpose(0, 3, 4, 1, 2),
        I + I.transpose(0, 1, 3, 4, 2) + I.transpose(0, 1, 4, 2, 3),
        np.einsum("xabkl,ai,bj->xijkl", I, J, J) - I,
    ]
    # each row block maps a basis tensor to its constraint image
    A = np.concatenate([r.reshape(N, N).T for r in rows], axis=0)
    _, sv, vt = np.linalg.svd(A)
    null = vt[np.sum(sv > 1e-10 * sv[0]):]
    return null.reshape((-1,) + (n,) * 4)


def random_kahler_curvature(seed: int, scale: float = 1.0) -> ExampleInstance:
    """Random Kahler-type curvature tensor for the standard J on R^4."""
    basis = _kahler_basis()
    rng = np.random.default_rng(seed)
    coeffs = rng.uniform(-scale, scale, size=basis.shape[0])
    R = np.tensordot(coeffs, basis, axes=1)
    R = project_curvature(R)
    return ExampleInstance(R, Metric.identity(4), STANDARD_J, label="random_kahler",
                           params={"seed": int(seed), "scale": float(scale)},
                           orientation=(0, 1, 2, 3))
