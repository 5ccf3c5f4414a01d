"""Pointwise Q-tensor / P-tensor algebra and Landau-de Gennes bulk formulas.

QTensor stores the five independent entries of a symmetric traceless 3x3
matrix, so symmetry and tracelessness hold by construction.  PTensor is the
2x2 reduced tensor [[p11, p12], [p12, -p11]] used by the thin-film model.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np


@dataclass(frozen=True)
class QTensor:
    """Symmetric traceless 3x3 tensor stored as (Q11, Q12, Q13, Q22, Q23)."""

    q: np.ndarray = field(default_factory=lambda: np.zeros(5))

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float).reshape(5)
        object.__setattr__(self, "q", q)

    @classmethod
    def from_matrix(cls, m) -> "QTensor":
        """Take the five independent entries of a matrix.

        The input is projected onto the traceless symmetric part first, so
        non-traceless input is not silently truncated.
        """
        m = np.asarray(m, dtype=float)
        m = 0.5 * (m + m.T)
        m = m - np.trace(m) / 3.0 * np.eye(3)
        return cls(np.array([m[0, 0], m[0, 1], m[0, 2], m[1, 1], m[1, 2]]))

    @classmethod
    def uniaxial(cls, s: float, n) -> "QTensor":
        n = np.asarray(n, dtype=float)
        n = n / np.linalg.norm(n)
        return cls.from_matrix(s * (np.outer(n, n) - np.eye(3) / 3.0))

    def matrix(self) -> np.ndarray:
        q1, q2, q3, q4, q5 = self.q
        return np.array([[q1, q2, q3],
                         [q2, q4, q5],
                         [q3, q5, -q1 - q4]])

    def tr2(self) -> float:
        m = self.matrix()
        return float(np.sum(m * m))

    def tr3(self) -> float:
        m = self.matrix()
        return float(np.trace(m @ m @ m))

    def norm2(self) -> float:
        """Frobenius norm squared, |Q|^2 = tr Q^2."""
        return self.tr2()


@dataclass(frozen=True)
class PTensor:
    p11: float = 0.0
    p12: float = 0.0

    def matrix(self) -> np.ndarray:
        return np.array([[self.p11, self.p12], [self.p12, -self.p11]])

    def tr2(self) -> float:
        return 2.0 * (self.p11 ** 2 + self.p12 ** 2)


@dataclass(frozen=True)
class MaterialConstants:
    """Landau-de Gennes constants: A, B, C in N/m^2 and L in N."""

    A: float
    B: float
    C: float
    L: float

    def __post_init__(self):
        if self.B < 0 or self.C <= 0 or self.L <= 0:
            raise ValueError(f"need B >= 0, C > 0, L > 0; got B={self.B}, C={self.C}, L={self.L}")

    @classmethod
    def mbba(cls, A: float | None = None) -> "MaterialConstants":
        """MBBA values; A defaults to the reduced temperature -B^2/(3C)."""
        B, C, L = 0.64e4, 0.35e4, 4e-11
        if A is None:
            A = -B * B / (3.0 * C)
        return cls(A=A, B=B, C=C, L=L)

    @property
    def discriminant(self) -> float:
        return self.B ** 2 - 24.0 * self.A * self.C


@dataclass(frozen=True)
class ModelParams:
    """Nondimensional groups of the rescaled energy.

    Use :meth:`from_physical` to build from SI inputs.  The energy weights in
    front of the mixing, anchoring and void integrals are exposed as
    ``w_mix``, ``w_anch`` and ``w_void``.
    """

    lambda_bar: float
    eps_bar: float
    omega_p_bar: float
    omega_a_bar: float
    omega_v_bar: float
    v0_bar: float
    material: MaterialConstants

    def __post_init__(self):
        for name in ("lambda_bar", "eps_bar"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("omega_p_bar", "omega_a_bar", "omega_v_bar"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if not 0.0 < self.v0_bar < 1.0:
            raise ValueError(f"v0_bar must lie in (0, 1), got {self.v0_bar}")

    @classmethod
    def from_physical(cls, material: MaterialConstants, lam: float, eps_bar: float = 0.005,
                      v0_bar: float = 0.09, omega_p_over_L: float = 3e7,
                      omega_a_over_L: float = 1e7, omega_v_over_L: float = 6e14,
                      eps: float | None = None) -> "ModelParams":
        """Rescale physical inputs; lengths in metres, weights given relative to L.

        ``eps`` (physical capillary width) overrides ``eps_bar`` when given.
        """
        C, L = material.C, material.L
        if eps is not None:
            eps_bar = eps / lam
        om_p = omega_p_over_L * L
        om_a = omega_a_over_L * L
        om_v = omega_v_over_L * L
        return cls(lambda_bar=float(np.sqrt(lam * lam * C / L)),
                   eps_bar=float(eps_bar),
                   omega_p_bar=float(om_p / np.sqrt(C * L)),
                   omega_a_bar=float(om_a / np.sqrt(C * L)),
                   omega_v_bar=float(om_v / C),
                   v0_bar=float(v0_bar),
                   material=material)

    def replace(self, **kw) -> "ModelParams":
        d = dict(lambda_bar=self.lambda_bar, eps_bar=self.eps_bar, omega_p_bar=self.omega_p_bar,
                 omega_a_bar=self.omega_a_bar, omega_v_bar=self.omega_v_bar, v0_bar=self.v0_bar,
                 material=self.material)
        d.update(kw)
        return ModelParams(**d)

    @property
    def s_plus(self) -> float:
        return s_plus(self.material)

    @property
    def w_bulk(self) -> float:
        return self.lambda_bar ** 2

    @property
    def w_mix(self) -> float:
        return self.omega_p_bar * self.lambda_bar

    @property
    def w_anch(self) -> float:
        return self.omega_a_bar * self.lambda_bar

    @property
    def w_void(self) -> float:
        return self.omega_v_bar * self.lambda_bar ** 2

    @property
    def b_over_c(self) -> float:
        return self.material.B / self.material.C


def s_plus(mat: MaterialConstants) -> float:
    """Preferred uniaxial order (B + sqrt(B^2 - 24AC)) / (4C)."""
    disc = mat.discriminant
    if disc < 0:
        raise ValueError(f"B^2 - 24AC = {disc:.6g} < 0: no real uniaxial minimiser")
    return (mat.B + np.sqrt(disc)) / (4.0 * mat.C)


def bulk_density(q: QTensor, mat: MaterialConstants) -> float:
    t2 = q.tr2()
    return mat.A / 2.0 * t2 - mat.B / 3.0 * q.tr3() + mat.C / 4.0 * t2 * t2


class BulkMinimum(NamedTuple):
    value: float
    nematic: bool  # False when A >= 0 and the minimum is the isotropic Q = 0


def bulk_min_bound(mat: MaterialConstants) -> BulkMinimum:
    """Global minimum of the scaled bulk density F_b / C over traceless Q.

    For A < 0 the minimiser is uniaxial with s = s_plus.  For A >= 0 we
    report 0 (attained at Q = 0) and flag it; the nematic branch may then be
    only metastable.
    """
    if mat.A >= 0:
        return BulkMinimum(0.0, False)
    s = s_plus(mat)
    q = QTensor.uniaxial(s, [0.0, 0.0, 1.0])
    return BulkMinimum(bulk_density(q, mat) / mat.C, True)


def project_traceless(m) -> QTensor:
    m = np.asarray(m, dtype=float)
    return QTensor.from_matrix(m - np.trace(m) / 3.0 * np.eye(3))


def bulk_gradient(q: QTensor, mat: MaterialConstants) -> QTensor:
    """Gradient of F_b / C restricted to symmetric traceless tensors."""
    m = q.matrix()
    t2 = q.tr2()
    g = (mat.A / mat.C + t2) * m - mat.B / mat.C * (m @ m - t2 / 3.0 * np.eye(3))
    return QTensor.from_matrix(g)


def anchoring_density_3d(q: QTensor, gphi, s_plus_value: float) -> float:
    """|(Q + s_+/3 I) grad(phi)|^2 without the epsilon prefactor."""
    v = (q.matrix() + s_plus_value / 3.0 * np.eye(3)) @ np.asarray(gphi, dtype=float)
    return float(v @ v)


def embed_P_to_Q(p: PTensor, s_plus_value: float) -> QTensor:
    m = np.zeros((3, 3))
    m[:2, :2] = p.matrix() + s_plus_value / 6.0 * np.eye(2)
    m[2, 2] = -s_plus_value / 3.0
    return QTensor(np.array([m[0, 0], m[0, 1], 0.0, m[1, 1], 0.0]))


def reduced_bulk_density(p, mat: MaterialConstants):
    """-B^2/(4C^2) tr P^2 + (tr P^2)^2 / 4.  Accepts a PTensor or (p11, p12) arrays."""
    if isinstance(p, PTensor):
        p11, p12 = p.p11, p.p12
    else:
        p11, p12 = p
    t = 2.0 * (np.asarray(p11) ** 2 + np.asarray(p12) ** 2)
    bc = mat.B / mat.C
    return -bc * bc / 4.0 * t + t * t / 4.0


def director_of_P(p11, p12):
    """Director angle in [0, pi), positive eigenvalue, and degeneracy flag.

    Works elementwise on arrays.  Where the order vanishes the angle is set to
    0 and the flag is True.
    """
    p11 = np.asarray(p11, dtype=float)
    p12 = np.asarray(p12, dtype=float)
    order = np.hypot(p11, p12)
    degenerate = order == 0.0
    angle = np.mod(0.5 * np.arctan2(p12, p11), np.pi)
    angle = np.where(degenerate, 0.0, angle)
    if angle.ndim == 0:
        return float(angle), float(order), bool(degenerate)
    return angle, order, degenerate
