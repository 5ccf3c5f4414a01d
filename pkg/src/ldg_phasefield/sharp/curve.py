"""Closed C^2 boundary curves built from samples with a periodic cubic spline."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from skimage.measure import points_in_poly


def _self_intersects(p):
    """Pairwise proper intersection test for the closed polygon with vertices p.

    Adjacent segments (sharing a vertex) are skipped.  O(m^2) memory, which is
    fine for a few thousand vertices.
    """
    a = p
    b = np.roll(p, -1, axis=0)
    m = len(p)

    def orient(u, v, w):
        return ((v[..., 0] - u[..., 0]) * (w[..., 1] - u[..., 1])
                - (v[..., 1] - u[..., 1]) * (w[..., 0] - u[..., 0]))

    A, B = a[:, None, :], b[:, None, :]
    C, D = a[None, :, :], b[None, :, :]
    d1 = orient(C, D, A)
    d2 = orient(C, D, B)
    d3 = orient(A, B, C)
    d4 = orient(A, B, D)
    hit = (d1 * d2 < 0) & (d3 * d4 < 0)
    i, j = np.indices((m, m))
    adjacent = (np.abs(i - j) <= 1) | (np.abs(i - j) == m - 1)
    return bool(np.any(hit & ~adjacent))


@dataclass(frozen=True)
class BoundaryCurve:
    """Counterclockwise closed curve through ``points`` (m >= 32, not repeated).

    The spline is parametrised by cumulative chord length ``t`` in
    ``[0, period)``; ``length`` evaluates the true arclength.
    """

    points: np.ndarray
    _spline: CubicSpline = field(init=False, repr=False, compare=False)
    period: float = field(init=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 32:
            raise ValueError("need an (m, 2) array of samples with m >= 32")
        if np.allclose(pts[0], pts[-1]):
            pts = pts[:-1]
        x, y = pts[:, 0], pts[:, 1]
        if 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y) <= 0:
            raise ValueError("curve must be counterclockwise with positive area")
        if _self_intersects(pts):
            raise ValueError("curve is not simple")
        chord = np.hypot(*np.diff(np.vstack([pts, pts[:1]]), axis=0).T)
        t = np.concatenate([[0.0], np.cumsum(chord)])
        spline = CubicSpline(t, np.vstack([pts, pts[:1]]), bc_type="periodic")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "_spline", spline)
        object.__setattr__(self, "period", float(t[-1]))

    @classmethod
    def circle(cls, center=(0.5, 0.5), radius=0.169257, m: int = 256) -> "BoundaryCurve":
        th = 2 * np.pi * np.arange(m) / m
        return cls(np.column_stack([center[0] + radius * np.cos(th), center[1] + radius * np.sin(th)]))

    @classmethod
    def ellipse(cls, center=(0.5, 0.5), a=0.2, b=0.1, angle=0.0, m: int = 256) -> "BoundaryCurve":
        th = 2 * np.pi * np.arange(m) / m
        u, v = a * np.cos(th), b * np.sin(th)
        c, s = np.cos(angle), np.sin(angle)
        return cls(np.column_stack([center[0] + c * u - s * v, center[1] + s * u + c * v]))

    def rigid_motion(self, angle: float, shift) -> "BoundaryCurve":
        c, s = np.cos(angle), np.sin(angle)
        R = np.array([[c, -s], [s, c]])
        return BoundaryCurve(self.points @ R.T + np.asarray(shift, dtype=float))

    def point(self, t):
        return self._spline(np.mod(t, self.period))

    def tangent(self, t):
        """Unit tangent (counterclockwise direction)."""
        d = self._spline(np.mod(t, self.period), 1)
        return d / np.linalg.norm(d, axis=-1, keepdims=True)

    def normal(self, t):
        """Unit outward normal."""
        tg = self.tangent(t)
        return np.stack([tg[..., 1], -tg[..., 0]], axis=-1)

    def speed(self, t):
        return np.linalg.norm(self._spline(np.mod(t, self.period), 1), axis=-1)

    def quadrature(self, k: int = 2048):
        """Nodes t, points, outward normals and arclength weights for smooth periodic integrands.

        The periodic trapezoid rule converges spectrally here.
        """
        t = self.period * np.arange(k) / k
        w = self.speed(t) * (self.period / k)
        return t, self.point(t), self.normal(t), w

    def integrate(self, f, k: int = 2048) -> float:
        """Line integral of ``f(points, normals)`` with respect to arclength."""
        _, x, nu, w = self.quadrature(k)
        return float(np.sum(w * f(x, nu)))

    def length(self, k: int = 2048) -> float:
        return self.integrate(lambda x, nu: np.ones(len(x)), k)

    def area(self, k: int = 2048) -> float:
        # Green: area = 1/2 closed integral of x dy - y dx = 1/2 integral of x.nu ds
        return self.integrate(lambda x, nu: 0.5 * np.sum(x * nu, axis=1), k)

    def contains(self, pts, k: int = 4096) -> np.ndarray:
        _, x, _, _ = self.quadrature(k)
        pts = np.asarray(pts, dtype=float)
        shape = pts.shape[:-1]
        return points_in_poly(pts.reshape(-1, 2), x).reshape(shape)

    def inside_unit_square(self, margin: float = 0.0) -> bool:
        _, x, _, _ = self.quadrature(1024)
        return bool(np.all((x > margin) & (x < 1 - margin)))

    def is_simple(self, k: int = 512) -> bool:
        _, x, _, _ = self.quadrature(k)
        return not _self_intersects(x)

    def distance(self, pts, k: int = 4096, newton_iter: int = 8) -> np.ndarray:
        """Euclidean distance to the spline: nearest sample, then Newton on the foot point."""
        from scipy.spatial import cKDTree

        pts = np.asarray(pts, dtype=float)
        shape = pts.shape[:-1]
        q = pts.reshape(-1, 2)
        tq = self.period * np.arange(k) / k
        _, idx = cKDTree(self.point(tq)).query(q)
        t = tq[idx]
        for _ in range(newton_iter):
            r = self._spline(np.mod(t, self.period)) - q
            d1 = self._spline(np.mod(t, self.period), 1)
            d2 = self._spline(np.mod(t, self.period), 2)
            g = np.sum(r * d1, axis=1)
            H = np.sum(d1 * d1, axis=1) + np.sum(r * d2, axis=1)
            t = t - g / np.where(H > 0, H, np.sum(d1 * d1, axis=1))
        return np.linalg.norm(self._spline(np.mod(t, self.period)) - q, axis=1).reshape(shape)
