"""Sharp-interface energy, recovery sequences and the diffuse-vs-sharp gap."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import optimize
from scipy.interpolate import RegularGridInterpolator

from ..energy import double_well, energy_ldg_2d
from ..fields import Grid2D, PTensorField, ScalarField, _atomic_write_text, grad_array, integrate
from ..tensor import ModelParams
from .curve import BoundaryCurve
from .forms import QuadraticFormField
from .sdf import GeneralizedSDF, generalized_sdf
from .wave import StandingWave, c0, solve_chi


class VolumeBracketError(ValueError):
    """The target volume is outside the range reachable by the shift delta."""


def _P_on_points(P, x):
    if isinstance(P, PTensorField):
        c = P.grid.coords
        f11 = RegularGridInterpolator((c, c), P.p11)
        f12 = RegularGridInterpolator((c, c), P.p12)
        return f11(x), f12(x)
    return P(x)


def _anchor_vector_norm(p11, p12, nu, s_plus_value):
    """|(P + s_+/2 I) nu| pointwise."""
    m11 = p11 + 0.5 * s_plus_value
    m22 = -p11 + 0.5 * s_plus_value
    vx = m11 * nu[:, 0] + p12 * nu[:, 1]
    vy = p12 * nu[:, 0] + m22 * nu[:, 1]
    return np.hypot(vx, vy)


@dataclass(frozen=True)
class SharpEnergy:
    boundary: float
    ldg: float
    void: float
    total: float


def boundary_integral(P, curve: BoundaryCurve, ratio: float, s_plus_value: float, k: int = 2048) -> float:
    """Closed integral of sqrt(a_P(nu)) = sqrt(1 + ratio |(P + s_+/2 I) nu|^2)."""
    _, x, nu, w = curve.quadrature(k)
    p11, p12 = _P_on_points(P, x)
    m = _anchor_vector_norm(np.asarray(p11), np.asarray(p12), nu, s_plus_value)
    return float(np.sum(w * np.sqrt(1.0 + ratio * m * m)))


def sharp_energy(P, curve: BoundaryCurve, params: ModelParams, grid: Grid2D | None = None,
                 W: Callable = double_well) -> SharpEnergy:
    """Sharp-interface limit energy of a tensor field and a droplet boundary.

    The boundary term is 2 c0 w_mix times the closed integral of sqrt(a_P(nu)),
    with ratio w_anch / w_mix.  ``P`` is a :class:`PTensorField` or a callable
    ``x -> (p11, p12)``; a callable needs ``grid`` for the bulk integrals.
    The void integral runs over the complement of the curve.
    """
    if not curve.inside_unit_square():
        raise ValueError("curve leaves the unit square")
    if not isinstance(P, PTensorField):
        if grid is None:
            raise ValueError("a callable P needs a grid for the bulk integrals")
        X, Y = grid.mesh()
        p11, p12 = P(np.stack([X, Y], axis=-1))
        b = grid.boundary_mask()
        P_grid = PTensorField(grid, np.where(b, 0.0, p11), np.where(b, 0.0, p12))
    else:
        P_grid = P
    g = P_grid.grid
    ratio = params.omega_a_bar / params.omega_p_bar if params.omega_p_bar > 0 else 0.0
    bnd = 2.0 * c0(1.0, 0.0, W) * params.w_mix * boundary_integral(P, curve, ratio, params.s_plus)
    ldg = energy_ldg_2d(P_grid, params)
    X, Y = g.mesh()
    outside = ~curve.contains(np.stack([X, Y], axis=-1))
    void = params.w_void * integrate(np.where(outside, 0.5 * P_grid.norm2(), 0.0), g)
    return SharpEnergy(bnd, ldg, void, bnd + ldg + void)


def sandwich_ratio(P, curve: BoundaryCurve, ratio: float, s_plus_value: float, k: int = 2048) -> float:
    """(perimeter + sqrt(ratio) * closed integral of |M nu|) / closed integral of sqrt(a(nu)).

    Lies in [1, sqrt(2)] because sqrt(1 + x^2) <= 1 + x <= sqrt(2) sqrt(1 + x^2).
    """
    _, x, nu, w = curve.quadrature(k)
    p11, p12 = _P_on_points(P, x)
    m = _anchor_vector_norm(np.asarray(p11), np.asarray(p12), nu, s_plus_value)
    top = np.sum(w * (1.0 + np.sqrt(ratio) * m))
    return float(top / np.sum(w * np.sqrt(1.0 + ratio * m * m)))


def sharp_target(form: QuadraticFormField, curve: BoundaryCurve, W: Callable = double_well,
                 alpha: float = 1.0, beta: float = 0.0, k: int = 4096) -> float:
    """2 c0 times the closed integral of sqrt(a(x, nu))."""
    return 2.0 * c0(alpha, beta, W) * curve.integrate(lambda x, nu: np.sqrt(form.a(x, nu)), k)


def tanh_profile(eps: float):
    """Tanh standing wave with linear connections, equal to 1 inside and 0 outside.

    1/2 (1 - tanh(t / (sqrt(2) eps))) on |t| < sqrt(eps), joined linearly to
    1 at t = -2 sqrt(eps) and to 0 at t = 2 sqrt(eps).
    """
    r = np.sqrt(eps)

    def core(t):
        return 0.5 * (1.0 - np.tanh(t / (np.sqrt(2.0) * eps)))

    lo_v, hi_v = core(-r), core(r)

    def f(t):
        t = np.asarray(t, dtype=float)
        out = core(np.clip(t, -r, r))
        left = (t < -r) & (t > -2 * r)
        right = (t > r) & (t < 2 * r)
        out = np.where(left, 1.0 + (lo_v - 1.0) * (t + 2 * r) / r, out)
        out = np.where(right, hi_v * (2 * r - t) / r, out)
        out = np.where(t <= -2 * r, 1.0, out)
        return np.where(t >= 2 * r, 0.0, out)

    return f, (-2 * r, 2 * r)


@dataclass
class Recovery:
    phi: ScalarField
    delta: float
    h: np.ndarray  # generalized distance at the nodes, NaN outside the band
    in_band: np.ndarray


def recovery_phi(sdf: GeneralizedSDF, wave: StandingWave | None, target_volume: float, grid: Grid2D,
                 profile: str = "ode", eps: float | None = None, xtol: float = 1e-15,
                 delta: float | None = None) -> Recovery:
    """phi_eps = profile(h + delta) with delta chosen so the trapezoidal volume matches.

    ``profile="ode"`` uses the truncated standing wave (delta in [0, eta]);
    ``profile="tanh"`` uses :func:`tanh_profile` and needs ``eps``.  Nodes
    outside the characteristic band take the pure phase (1 inside, 0 outside).
    The volume is non-increasing in delta for this orientation.  Passing
    ``delta`` skips the volume matching and builds that member of the family.
    """
    if not 0.0 < target_volume < 1.0:
        raise VolumeBracketError("target volume must lie in (0, 1)")
    X, Y = grid.mesh()
    pts = np.stack([X, Y], axis=-1)
    res = sdf.evaluate(pts)
    inside = sdf.curve.contains(pts)
    pure = np.where(inside, 1.0, 0.0)
    band = res.in_band & grid.interior_mask()
    hb = res.h[band]
    if profile == "ode":
        if wave is None:
            raise ValueError("profile 'ode' needs a StandingWave")
        f = wave
        lo, hi = 0.0, wave.eta
    elif profile == "tanh":
        if eps is None:
            raise ValueError("profile 'tanh' needs eps")
        f, (lo, hi) = tanh_profile(eps)
    else:
        raise ValueError(f"unknown profile {profile!r}")

    def build(delta):
        phi = pure.copy()
        phi[band] = f(hb + delta)
        return phi

    if delta is not None:
        return Recovery(ScalarField(grid, build(delta)), float(delta), res.h, res.in_band)

    def gap(delta):
        return integrate(build(delta), grid) - target_volume

    g_lo, g_hi = gap(lo), gap(hi)
    if g_lo < 0 or g_hi > 0:
        raise VolumeBracketError(f"volume {target_volume} not bracketed: "
                                 f"[{g_hi + target_volume:.6g}, {g_lo + target_volume:.6g}]")
    if g_lo == 0:
        delta = lo
    elif g_hi == 0:
        delta = hi
    else:
        delta = optimize.brentq(gap, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=400)
    return Recovery(ScalarField(grid, build(delta)), float(delta), res.h, res.in_band)


def diffuse_functional(phi: ScalarField, form: QuadraticFormField, eps: float,
                       W: Callable = double_well):
    """(gradient part, potential part) of the integral of eps a(x, grad phi) + W(phi) / eps."""
    g = phi.grid
    gx, gy = grad_array(phi.values, g.h)
    X, Y = g.mesh()
    a = form.a(np.stack([X, Y], axis=-1), np.stack([gx, gy], axis=-1))
    return eps * integrate(a, g), integrate(W(phi.values), g) / eps


@dataclass(frozen=True)
class GapRow:
    eps: float
    diffuse: float
    sharp_target: float
    rel_gap: float
    equipartition_ratio: float
    n: int
    delta: float
    band_in: float
    band_out: float


def grid_for_eps(eps: float, n_min: int = 65) -> Grid2D:
    """Smallest grid with h <= eps / 2."""
    return Grid2D(max(n_min, int(np.ceil(2.0 / eps - 1e-9)) + 1))


def gamma_gap(form: QuadraticFormField, curve: BoundaryCurve, eps_list, W: Callable = double_well,
              profile: str = "ode", grids=None, band_halfwidth: float = 0.05,
              target_volume: float | None = None) -> list[GapRow]:
    """Diffuse functional on the recovery sequence against the sharp limit, per eps.

    ``grids`` optionally maps each eps to a :class:`Grid2D`; by default the
    grid satisfies h <= eps / 2.
    """
    eps_list = [float(e) for e in eps_list]
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be strictly decreasing")
    target = sharp_target(form, curve, W)
    if target_volume is None:
        target_volume = curve.area()
    sdf = generalized_sdf(form, curve, band_halfwidth)
    rows = []
    for k, eps in enumerate(eps_list):
        grid = grids[k] if grids is not None else grid_for_eps(eps)
        wave = solve_chi(eps, W, alpha=1.0, beta=0.0) if profile == "ode" else None
        rec = recovery_phi(sdf, wave, target_volume, grid, profile=profile, eps=eps)
        grad_part, pot_part = diffuse_functional(rec.phi, form, eps, W)
        diffuse = grad_part + pot_part
        rows.append(GapRow(eps, diffuse, target, abs(diffuse - target) / target,
                           grad_part / pot_part if pot_part > 0 else float("inf"),
                           grid.n, rec.delta, sdf.s_in, sdf.s_out))
    return rows


GAP_HEADER = ["eps", "diffuse", "sharp_target", "rel_gap", "equipartition_ratio"]


def write_gap_csv(path, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(GAP_HEADER)
    for r in rows:
        w.writerow([repr(float(r.eps)), repr(float(r.diffuse)), repr(float(r.sharp_target)),
                    repr(float(r.rel_gap)), repr(float(r.equipartition_ratio))])
    _atomic_write_text(path, buf.getvalue())


def gap_criterion(rows, threshold: float = 0.05) -> bool:
    """Gaps strictly decrease along the list and the last one is below ``threshold``."""
    gaps = [r.rel_gap for r in rows]
    return all(b < a for a, b in zip(gaps, gaps[1:])) and gaps[-1] < threshold


