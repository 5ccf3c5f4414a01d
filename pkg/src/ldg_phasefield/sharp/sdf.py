"""Generalized signed distance a(x, grad h) = 1 by the method of characteristics.

Characteristics start on the curve with X(0) = y, U(0) = 0 and
P(0) = nu / sqrt(a(y, nu)); along them

    X' = 2 A(X) P,   U' = 2 a(X, P),   P'_k = -(d_k A)(X)[P, P].

Since a(X, P) stays 1, U = 2s and h(X(s; y)) = 2s.  The (s, t) chart is
inverted by a nearest-node search followed by Newton iterations on a cubic
spline of the table.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RectBivariateSpline
from scipy.spatial import cKDTree

from .curve import BoundaryCurve
from .forms import QuadraticFormField

logger = logging.getLogger(__name__)

_PAD = 4  # periodic padding columns for the t-splines


class CharacteristicCrossingError(RuntimeError):
    """The band could not be shrunk enough to avoid crossing characteristics."""


@dataclass
class SDFResult:
    h: np.ndarray  # NaN outside the band
    grad: np.ndarray  # (..., 2), NaN outside the band
    in_band: np.ndarray
    s: np.ndarray


def _rhs(form: QuadraticFormField, X, P):
    A = form(X)
    AP = np.einsum("...ij,...j->...i", A, P)
    dX = 2.0 * AP
    dU = 2.0 * np.einsum("...i,...i->...", P, AP)
    if form.constant:
        dP = np.zeros_like(P)
    else:
        dA = form.grad(X)
        dP = -np.einsum("...i,...kij,...j->...k", P, dA, P)
    return dX, dU, dP


def integrate_characteristics(form: QuadraticFormField, X0, P0, s_end: float, steps: int):
    """Classical RK4 from s = 0 to ``s_end`` (either sign) in ``steps`` steps.

    Returns arrays of shape (steps + 1, m, ...) for X, U and P.
    """
    ds = s_end / steps
    X, P = X0.copy(), P0.copy()
    U = np.zeros(X0.shape[0])
    Xs, Us, Ps = [X.copy()], [U.copy()], [P.copy()]
    for _ in range(steps):
        k1 = _rhs(form, X, P)
        k2 = _rhs(form, X + 0.5 * ds * k1[0], P + 0.5 * ds * k1[2])
        k3 = _rhs(form, X + 0.5 * ds * k2[0], P + 0.5 * ds * k2[2])
        k4 = _rhs(form, X + ds * k3[0], P + ds * k3[2])
        X = X + ds / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        U = U + ds / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        P = P + ds / 6.0 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        Xs.append(X)
        Us.append(U)
        Ps.append(P)
    return np.array(Xs), np.array(Us), np.array(Ps)


def _jacobian(form, X, P, dt):
    """det[dX/ds, dX/dt] on the table; positive where the chart is orientation preserving."""
    Xs = 2.0 * np.einsum("...ij,...j->...i", form(X), P)
    Xt = (np.roll(X, -1, axis=1) - np.roll(X, 1, axis=1)) / (2.0 * dt)
    return Xs[..., 0] * Xt[..., 1] - Xs[..., 1] * Xt[..., 0]


class GeneralizedSDF:
    """Evaluator h(x), grad h(x) on the band -s_in <= s <= s_out around the curve."""

    def __init__(self, form, curve, t, s, X, U, P, s_in, s_out, shrinks):
        self.form = form
        self.curve = curve
        self.t = t
        self.s = s
        self.X = X
        self.U = U
        self.P = P
        self.s_in = s_in
        self.s_out = s_out
        self.shrinks = shrinks
        dt = t[1] - t[0]
        self._dt = dt
        tt = np.concatenate([t[-_PAD:] - curve.period, t, t[:_PAD] + curve.period])

        def spline(v):
            vv = np.concatenate([v[:, -_PAD:], v, v[:, :_PAD]], axis=1)
            return RectBivariateSpline(s, tt, vv, kx=3, ky=3)

        self._sx = spline(X[..., 0])
        self._sy = spline(X[..., 1])
        self._px = spline(P[..., 0])
        self._py = spline(P[..., 1])
        pts = X.reshape(-1, 2)
        self._tree = cKDTree(pts)
        ds = s[1] - s[0]
        step_s = np.max(np.linalg.norm(np.diff(X, axis=0), axis=-1))
        step_t = np.max(np.linalg.norm(np.roll(X, -1, axis=1) - X, axis=-1))
        self._reach = 1.5 * max(step_s, step_t)
        self._ds = ds

    def hamiltonian_drift(self) -> float:
        """max |a(X, P) - 1| over the whole table."""
        return float(np.max(np.abs(self.form.a(self.X, self.P) - 1.0)))

    def u_minus_2s(self) -> float:
        return float(np.max(np.abs(self.U - 2.0 * self.s[:, None])))

    def evaluate(self, points, newton_iter: int = 12, tol: float = 1e-13) -> SDFResult:
        pts = np.asarray(points, dtype=float)
        shape = pts.shape[:-1]
        q = pts.reshape(-1, 2)
        n = len(q)
        h = np.full(n, np.nan)
        grad = np.full((n, 2), np.nan)
        sv = np.full(n, np.nan)
        in_band = np.zeros(n, dtype=bool)
        dist, idx = self._tree.query(q, distance_upper_bound=self._reach)
        cand = np.isfinite(dist)
        if np.any(cand):
            qi = q[cand]
            ks, kt = np.divmod(idx[cand], len(self.t))
            s = self.s[ks].astype(float)
            t = self.t[kt].astype(float)
            lo = self.s[0] - 2 * self._ds
            hi = self.s[-1] + 2 * self._ds
            for _ in range(newton_iter):
                fx = self._sx.ev(s, t) - qi[:, 0]
                fy = self._sy.ev(s, t) - qi[:, 1]
                a11 = self._sx.ev(s, t, dx=1)
                a12 = self._sx.ev(s, t, dy=1)
                a21 = self._sy.ev(s, t, dx=1)
                a22 = self._sy.ev(s, t, dy=1)
                det = a11 * a22 - a12 * a21
                det = np.where(det == 0.0, np.finfo(float).tiny, det)
                s = np.clip(s - (a22 * fx - a12 * fy) / det, lo, hi)
                t = t - (a11 * fy - a21 * fx) / det
                if np.max(np.abs(fx) + np.abs(fy)) < tol:
                    break
            t = np.mod(t, self.curve.period)
            res = np.hypot(self._sx.ev(s, t) - qi[:, 0], self._sy.ev(s, t) - qi[:, 1])
            ok = (res < 1e-9) & (s >= -self.s_in) & (s <= self.s_out)
            ci = np.nonzero(cand)[0]
            sv[ci] = s
            good = ci[ok]
            in_band[good] = True
            h[good] = 2.0 * s[ok]
            grad[good, 0] = self._px.ev(s[ok], t[ok])
            grad[good, 1] = self._py.ev(s[ok], t[ok])
        return SDFResult(h.reshape(shape), grad.reshape(shape + (2,)), in_band.reshape(shape),
                         sv.reshape(shape))


def generalized_sdf(form: QuadraticFormField, curve: BoundaryCurve, band_halfwidth: float = 0.05,
                    m: int = 512, steps: int = 100, shrink: float = 0.8,
                    max_shrinks: int = 20) -> GeneralizedSDF:
    """Build the generalized signed distance on |s| <= ``band_halfwidth``.

    The inner and outer halves are integrated separately.  If the Jacobian of
    (s, t) -> X changes sign on one side (characteristics cross), that side
    is shrunk to ``shrink`` times the first crossing parameter and
    recomputed.  h < 0 inside the curve.
    """
    if not curve.inside_unit_square():
        raise ValueError("curve leaves the unit square")
    t = curve.period * np.arange(m) / m
    dt = t[1] - t[0]
    y = curve.point(t)
    nu = curve.normal(t)
    P0 = nu / np.sqrt(form.a(y, nu))[:, None]
    halves = {}
    n_shrinks = 0
    for side, sgn in (("in", -1.0), ("out", 1.0)):
        width = band_halfwidth
        for _ in range(max_shrinks + 1):
            X, U, P = integrate_characteristics(form, y, P0, sgn * width, steps)
            J = _jacobian(form, X, P, dt)
            bad = np.nonzero(np.min(J, axis=1) <= 0.0)[0]
            if len(bad) == 0:
                break
            first = bad[0]
            width = shrink * width * first / steps
            n_shrinks += 1
            logger.info("characteristics cross on the %s side; band shrunk to %.4g", side, width)
            if width <= 0:
                raise CharacteristicCrossingError(f"no crossing-free band on the {side} side")
        else:
            raise CharacteristicCrossingError(f"band still crosses after {max_shrinks} shrinks")
        halves[side] = (width, X, U, P)
    w_in, Xi, Ui, Pi = halves["in"]
    w_out, Xo, Uo, Po = halves["out"]
    s = np.concatenate([-w_in * np.arange(steps, 0, -1) / steps, w_out * np.arange(steps + 1) / steps])
    X = np.concatenate([Xi[:0:-1], Xo])
    U = np.concatenate([Ui[:0:-1], Uo])
    P = np.concatenate([Pi[:0:-1], Po])
    return GeneralizedSDF(form, curve, t, s, X, U, P, w_in, w_out, n_shrinks)
