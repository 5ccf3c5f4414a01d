"""Anisotropic quadratic forms a(x, xi) = xi^T A(x) xi and the anchoring form a_Q."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..tensor import PTensor, QTensor


def a_Q(q, xi, ratio: float, s_plus_value: float) -> float:
    """|xi|^2 + ratio * |(Q + s_+/3 I) xi|^2.

    A :class:`PTensor` with a 2-vector uses the reduced form (P + s_+/2 I_2).
    """
    if ratio < 0:
        raise ValueError("ratio must be non-negative")
    xi = np.asarray(xi, dtype=float)
    if isinstance(q, PTensor):
        M = q.matrix() + 0.5 * s_plus_value * np.eye(2)
    elif isinstance(q, QTensor):
        M = q.matrix() + s_plus_value / 3.0 * np.eye(3)
    else:
        raise TypeError("q must be a QTensor or PTensor")
    v = M @ xi
    return float(xi @ xi + ratio * (v @ v))


def anchoring_matrix(p11, p12, ratio: float, s_plus_value: float) -> np.ndarray:
    """A = I + ratio (P + s_+/2 I)^2 for arrays of (p11, p12); shape (..., 2, 2)."""
    p11 = np.asarray(p11, dtype=float)
    p12 = np.asarray(p12, dtype=float)
    iso = p11 ** 2 + p12 ** 2 + 0.25 * s_plus_value ** 2
    A = np.empty(p11.shape + (2, 2))
    A[..., 0, 0] = 1.0 + ratio * (iso + s_plus_value * p11)
    A[..., 1, 1] = 1.0 + ratio * (iso - s_plus_value * p11)
    A[..., 0, 1] = A[..., 1, 0] = ratio * s_plus_value * p12
    return A


@dataclass(frozen=True)
class QuadraticFormField:
    """Position-dependent symmetric 2x2 matrix field with ellipticity bounds.

    ``matrix(x)`` takes points of shape (..., 2) and returns (..., 2, 2).
    ``dmatrix`` (optional) returns the x- and y-derivatives with shape
    (..., 2, 2, 2), derivative index first; central differences are used
    otherwise.
    """

    matrix: Callable
    lam: float
    Lam: float
    dmatrix: Callable | None = None
    constant: bool = False

    def __post_init__(self):
        if not 0 < self.lam <= self.Lam:
            raise ValueError("need 0 < lam <= Lam")

    def __call__(self, x) -> np.ndarray:
        return self.matrix(np.asarray(x, dtype=float))

    def a(self, x, xi) -> np.ndarray:
        A = self(x)
        xi = np.asarray(xi, dtype=float)
        return np.einsum("...i,...ij,...j->...", xi, A, xi)

    def grad(self, x, step: float = 1e-6) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.constant:
            return np.zeros(x.shape[:-1] + (2, 2, 2))
        if self.dmatrix is not None:
            return self.dmatrix(x)
        out = []
        for k in range(2):
            e = np.zeros(2)
            e[k] = step
            out.append((self(x + e) - self(x - e)) / (2 * step))
        return np.stack(out, axis=-3)

    def check_ellipticity(self, n: int = 1000, seed: int = 0, tol: float = 1e-12) -> bool:
        """Sample lam |xi|^2 <= a(x, xi) <= Lam |xi|^2 at random points of the unit square."""
        rng = np.random.default_rng(seed)
        x = rng.uniform(size=(n, 2))
        xi = rng.normal(size=(n, 2))
        a = self.a(x, xi)
        n2 = np.sum(xi * xi, axis=1)
        return bool(np.all(a >= self.lam * n2 * (1 - tol)) and np.all(a <= self.Lam * n2 * (1 + tol)))

    @classmethod
    def identity(cls) -> "QuadraticFormField":
        return cls.constant_matrix(np.eye(2))

    @classmethod
    def constant_matrix(cls, A) -> "QuadraticFormField":
        A = np.asarray(A, dtype=float)
        if A.shape != (2, 2) or not np.allclose(A, A.T):
            raise ValueError("A must be a symmetric 2x2 matrix")
        ev = np.linalg.eigvalsh(A)
        return cls(lambda x: np.broadcast_to(A, np.shape(x)[:-1] + (2, 2)).copy(),
                   float(ev[0]), float(ev[1]), constant=True)

    @classmethod
    def constant_director(cls, angle: float, ratio: float, s_plus_value: float,
                          order: float | None = None) -> "QuadraticFormField":
        """Anchoring form of a uniform P with director ``angle``.

        ``order`` is the positive eigenvalue of P (default s_+/2, the bulk
        minimiser of the reduced model).
        """
        if order is None:
            order = 0.5 * s_plus_value
        A = anchoring_matrix(order * np.cos(2 * angle), order * np.sin(2 * angle), ratio, s_plus_value)
        return cls.constant_matrix(A)

    @classmethod
    def from_P(cls, p_of_x: Callable, ratio: float, s_plus_value: float,
               bound: float) -> "QuadraticFormField":
        """Anchoring form of a smooth P field ``p_of_x(x) -> (p11, p12)``.

        ``bound`` is an upper bound on the order |p| over the domain, used for
        the ellipticity constants.
        """
        def matrix(x):
            p11, p12 = p_of_x(x)
            return anchoring_matrix(p11, p12, ratio, s_plus_value)

        Lam = 1.0 + ratio * (bound + 0.5 * s_plus_value) ** 2
        return cls(matrix, 1.0, Lam)
