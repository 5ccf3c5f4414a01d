"""Discrete reduced diffuse-interface energy and its four contributions.

Discretisation (all terms share the node grid):

* |grad P|^2 and |grad phi|^2 are summed over grid edges, so their exact
  discrete derivative is the 5-point Laplacian;
* bulk, double-well and void densities use trapezoidal nodal weights;
* the anchoring density is evaluated once per grid cell, with the bilinear
  element gradient of phi at the cell centre and P averaged from the four
  corners.  Nodal central differences decouple odd and even nodes across an
  interface only one or two cells wide, which at N=128 is enough to split a
  central +1 defect artificially.

``evaluate`` returns the raw terms and, on request, the exact derivatives
with respect to the interior nodal unknowns.  Everything else in the package
(dynamics, checks) goes through it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import Grid2D, PTensorField, ScalarField, edge_energy, laplacian_array
from .tensor import ModelParams


def double_well(s):
    return s * s * (1.0 - s) ** 2


def double_well_prime(s):
    return 2.0 * s * (s - 1.0) * (2.0 * s - 1.0)


@dataclass(frozen=True)
class EnergyBreakdown:
    e_ldg: float
    e_mix: float
    e_anch: float
    e_void: float
    total: float
    w_mix: float
    w_anch: float
    w_void: float
    lambda_bar: float
    eps_bar: float

    def as_dict(self) -> dict:
        return {"e_ldg": self.e_ldg, "e_mix": self.e_mix, "e_anch": self.e_anch,
                "e_void": self.e_void, "total": self.total}


@dataclass
class Evaluation:
    """Raw energy terms plus optional coordinate derivatives.

    ``d_p11``, ``d_p12``, ``d_phi`` are dE/d(nodal value) with boundary
    entries set to zero.
    """

    e_ldg: float
    e_mix: float
    e_anch: float
    e_void: float
    total: float
    d_p11: np.ndarray | None = None
    d_p12: np.ndarray | None = None
    d_phi: np.ndarray | None = None


def evaluate(p11: np.ndarray, p12: np.ndarray, phi: np.ndarray, params: ModelParams,
             grid: Grid2D, derivatives: bool = False) -> Evaluation:
    h = grid.h
    w = grid.weights()
    interior = grid.interior_mask()
    sp = params.s_plus
    bc = params.b_over_c
    eps = params.eps_bar

    # LdG: elastic + bulk
    q2 = p11 * p11 + p12 * p12
    t = 2.0 * q2
    elastic = edge_energy(p11) + edge_energy(p12)  # 1/2 |grad P|^2 = |grad p11|^2 + |grad p12|^2
    bulk_density = -bc * bc / 4.0 * t + 0.25 * t * t
    e_ldg = elastic + params.w_bulk * float(np.sum(w * bulk_density))

    # mixing
    e_mix = eps * edge_energy(phi) + float(np.sum(w * double_well(phi))) / eps

    # anchoring
    an = _anchoring_cells(p11, p12, phi, sp, h, derivatives)
    e_anch = eps * an[0]

    # void
    om = 1.0 - phi
    e_void = float(np.sum(w * 0.5 * om * om * t))

    total = e_ldg + params.w_mix * e_mix + params.w_anch * e_anch + params.w_void * e_void
    ev = Evaluation(e_ldg, e_mix, e_anch, e_void, total)
    if not derivatives:
        return ev

    h2 = h * h
    dbulk = -bc * bc + 2.0 * t  # d(bulk)/dp11 = dbulk * p11
    d_p11 = (-2.0 * h2 * laplacian_array(p11, h)
             + params.w_bulk * w * dbulk * p11
             + params.w_anch * eps * an[1]
             + params.w_void * w * om * om * 2.0 * p11)
    d_p12 = (-2.0 * h2 * laplacian_array(p12, h)
             + params.w_bulk * w * dbulk * p12
             + params.w_anch * eps * an[2]
             + params.w_void * w * om * om * 2.0 * p12)
    d_phi = (params.w_mix * (-2.0 * eps * h2 * laplacian_array(phi, h) + w * double_well_prime(phi) / eps)
             + params.w_anch * eps * an[3]
             - params.w_void * w * om * t)
    ev.d_p11 = np.where(interior, d_p11, 0.0)
    ev.d_p12 = np.where(interior, d_p12, 0.0)
    ev.d_phi = np.where(interior, d_phi, 0.0)
    return ev


def _cell_mean(a):
    return 0.25 * (a[:-1, :-1] + a[1:, :-1] + a[:-1, 1:] + a[1:, 1:])


def _to_nodes(c):
    """Adjoint of _cell_mean: spread each cell value equally to its corners."""
    out = np.zeros((c.shape[0] + 1, c.shape[1] + 1))
    q = 0.25 * c
    out[:-1, :-1] += q
    out[1:, :-1] += q
    out[:-1, 1:] += q
    out[1:, 1:] += q
    return out


def _anchoring_cells(p11, p12, phi, sp, h, derivatives):
    # bilinear element gradient at each cell centre, P averaged from the corners
    a, b, c, d = phi[:-1, :-1], phi[1:, :-1], phi[:-1, 1:], phi[1:, 1:]
    gx = (b - a + d - c) / (2.0 * h)
    gy = (c - a + d - b) / (2.0 * h)
    q11 = _cell_mean(p11)
    q12 = _cell_mean(p12)
    iso = q11 * q11 + q12 * q12 + 0.25 * sp * sp
    m2g_x = iso * gx + sp * (q11 * gx + q12 * gy)
    m2g_y = iso * gy + sp * (q12 * gx - q11 * gy)
    h2 = h * h
    e = h2 * float(np.sum(gx * m2g_x + gy * m2g_y))
    if not derivatives:
        return (e,)
    g2 = gx * gx + gy * gy
    d11 = _to_nodes(h2 * (2.0 * q11 * g2 + sp * (gx * gx - gy * gy)))
    d12 = _to_nodes(h2 * (2.0 * q12 * g2 + sp * 2.0 * gx * gy))
    # chain rule through gx, gy: dE/dg = 2 h^2 M^2 g
    vx = 2.0 * h2 * m2g_x / (2.0 * h)
    vy = 2.0 * h2 * m2g_y / (2.0 * h)
    dphi = np.zeros_like(phi)
    dphi[:-1, :-1] += -vx - vy
    dphi[1:, :-1] += vx - vy
    dphi[:-1, 1:] += -vx + vy
    dphi[1:, 1:] += vx + vy
    return (e, d11, d12, dphi)


def _breakdown(ev: Evaluation, params: ModelParams) -> EnergyBreakdown:
    return EnergyBreakdown(ev.e_ldg, ev.e_mix, ev.e_anch, ev.e_void, ev.total,
                           params.w_mix, params.w_anch, params.w_void,
                           params.lambda_bar, params.eps_bar)


def energy_ldg_2d(P: PTensorField, params: ModelParams) -> float:
    """Integral of 1/2 |grad P|^2 + lambda^2 * reduced bulk density."""
    zero = np.zeros_like(P.p11)
    return evaluate(P.p11, P.p12, zero + 1.0, params, P.grid).e_ldg


def energy_mix(phi: ScalarField, params: ModelParams) -> float:
    """Integral of eps |grad phi|^2 + W(phi) / eps."""
    g = phi.grid
    eps = params.eps_bar
    return eps * edge_energy(phi.values) + float(np.sum(g.weights() * double_well(phi.values))) / eps


def energy_anch_2d(P: PTensorField, phi: ScalarField, params: ModelParams) -> float:
    return evaluate(P.p11, P.p12, phi.values, params, P.grid).e_anch


def energy_void_2d(P: PTensorField, phi: ScalarField, params: ModelParams) -> float:
    return evaluate(P.p11, P.p12, phi.values, params, P.grid).e_void


def energy_total(P: PTensorField, phi: ScalarField, params: ModelParams) -> EnergyBreakdown:
    if P.grid != phi.grid:
        raise ValueError("P and phi live on different grids")
    return _breakdown(evaluate(P.p11, P.p12, phi.values, params, P.grid), params)
