"""Post-processing of converged states: defects, N-I interface, state labels.

Director angles are compared modulo pi, so a loop around a plaquette picks up
half-integer winding.  Classification thresholds live in :class:`Thresholds`
and are calibration constants rather than physical quantities.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np
from scipy import ndimage
from skimage import measure

from .energy import energy_total
from .fields import PTensorField, ScalarField, _atomic_write_text
from .tensor import ModelParams


class EmptyInterfaceError(ValueError):
    """No closed {phi = level} contour exists."""


@dataclass(frozen=True)
class Defect:
    x: float
    y: float
    charge: float
    plaquette: tuple  # (i, j) of the lower-left node of a representative cell


@dataclass(frozen=True)
class InterfaceStats:
    contour: np.ndarray  # (k, 2) closed polyline in (x, y)
    perimeter: float
    area: float
    aspect_ratio: float
    centroid: tuple


@dataclass(frozen=True)
class Thresholds:
    """Tunable calibration constants for defect detection and labelling.

    ``defect_order`` is relative to the largest order inside the droplet;
    ``isotropic_order`` is relative to s_+.
    """

    phi_min: float = 0.5
    defect_order: float = 0.02
    isotropic_order: float = 0.005
    radial_max_aspect: float = 1.15
    polar_min_aspect: float = 1.05
    tactoid_min_aspect: float = 1.6
    centroid_radius: float = 0.1


DEFAULT_THRESHOLDS = Thresholds()


def _wrap_half(d):
    """Wrap director-angle differences into (-pi/2, pi/2]."""
    return np.pi / 2 - np.mod(np.pi / 2 - d, np.pi)


def director_angle(P: PTensorField) -> np.ndarray:
    return 0.5 * np.arctan2(P.p12, P.p11)


def order_field(P: PTensorField) -> np.ndarray:
    """Positive eigenvalue of P at every node."""
    return np.hypot(P.p11, P.p12)


def plaquette_charges(theta: np.ndarray) -> np.ndarray:
    """Winding of the director around every grid cell, counterclockwise in (x, y)."""
    a = theta[:-1, :-1]
    b = theta[1:, :-1]
    c = theta[1:, 1:]
    d = theta[:-1, 1:]
    total = _wrap_half(b - a) + _wrap_half(c - b) + _wrap_half(d - c) + _wrap_half(a - d)
    return np.round(total / np.pi) / 2.0


def loop_charge(theta: np.ndarray, i0: int, i1: int, j0: int, j1: int) -> float:
    """Winding along the node rectangle [i0, i1] x [j0, j1], counterclockwise."""
    path = ([(i, j0) for i in range(i0, i1)] + [(i1, j) for j in range(j0, j1)]
            + [(i, j1) for i in range(i1, i0, -1)] + [(i0, j) for j in range(j1, j0, -1)])
    path.append(path[0])
    ang = np.array([theta[p] for p in path])
    return float(np.round(np.sum(_wrap_half(np.diff(ang))) / np.pi) / 2.0)


def _corner_all(mask: np.ndarray) -> np.ndarray:
    return mask[:-1, :-1] & mask[1:, :-1] & mask[:-1, 1:] & mask[1:, 1:]


def _phi_at(phi: np.ndarray, x: float, y: float, h: float) -> float:
    return float(ndimage.map_coordinates(phi, [[x / h], [y / h]], order=1)[0])


def detect_defects(P: PTensorField, phi: ScalarField, phi_min: float | None = None,
                   order_min: float | None = None,
                   thresholds: Thresholds = DEFAULT_THRESHOLDS) -> list[Defect]:
    """Half-integer defects of the director field inside the nematic phase.

    The director is trusted at nodes whose order exceeds ``order_min``
    (default: ``thresholds.defect_order`` times the largest order where
    phi > ``phi_min``).  Cells whose four corners are all trusted get a
    winding number; cells with nonzero winding are merged by 8-connectivity
    into one defect at the charge-weighted centroid.  A connected patch of
    untrusted cells (a wide core) gets the winding of the smallest rectangle
    of trusted nodes around it, minus charge already found inside.  Defects
    whose position has phi <= ``phi_min`` are dropped.
    """
    if phi_min is None:
        phi_min = thresholds.phi_min
    g = P.grid
    h = g.h
    order = order_field(P)
    nematic = phi.values > phi_min
    if not np.any(nematic):
        return []
    if order_min is None:
        order_min = thresholds.defect_order * float(order[nematic].max())
    ordered = order > order_min
    if not np.any(ordered & nematic):
        return []
    theta = director_angle(P)
    cell_ok = _corner_all(ordered)
    q = np.where(cell_ok, plaquette_charges(theta), 0.0)

    found = []
    labels, nlab = ndimage.label(q != 0.0, structure=np.ones((3, 3)))
    for k in range(1, nlab + 1):
        ii, jj = np.nonzero(labels == k)
        qk = q[ii, jj]
        total = float(qk.sum())
        if total == 0.0:
            continue
        w = np.abs(qk)
        x = float(np.sum(w * (ii + 0.5)) / w.sum() * h)
        y = float(np.sum(w * (jj + 0.5)) / w.sum() * h)
        found.append(Defect(x, y, total, (int(ii[0]), int(jj[0]))))

    # wide cores: untrusted patches enclosed by trusted nodes
    hlab, nh = ndimage.label(~cell_ok, structure=np.ones((3, 3)))
    for k in range(1, nh + 1):
        ii, jj = np.nonzero(hlab == k)
        i0, i1 = ii.min() - 1, ii.max() + 2
        j0, j1 = jj.min() - 1, jj.max() + 2
        if i0 < 0 or j0 < 0 or i1 >= g.n or j1 >= g.n:
            continue
        ring = np.zeros_like(ordered)
        ring[i0:i1 + 1, [j0, j1]] = True
        ring[[i0, i1], j0:j1 + 1] = True
        if not np.all(ordered[ring]):
            continue
        total = loop_charge(theta, i0, i1, j0, j1) - float(q[i0:i1, j0:j1].sum())
        if total == 0.0:
            continue
        # core position: order minimum over the nodes of the patch
        node_in = np.zeros((g.n, g.n), dtype=bool)
        for di in (0, 1):
            for dj in (0, 1):
                node_in[ii + di, jj + dj] = True
        masked = np.where(node_in, order, np.inf)
        bi, bj = np.unravel_index(np.argmin(masked), masked.shape)
        found.append(Defect(float(bi * h), float(bj * h), total, (int(ii[0]), int(jj[0]))))

    defects = [d for d in found if _phi_at(phi.values, d.x, d.y, h) > phi_min]
    defects.sort(key=lambda d: (d.x, d.y))
    return defects


def _polygon_moments(xy: np.ndarray):
    x, y = xy[:-1, 0], xy[:-1, 1]
    xn, yn = xy[1:, 0], xy[1:, 1]
    cr = x * yn - xn * y
    area = 0.5 * cr.sum()
    cx = np.sum((x + xn) * cr) / (6.0 * area)
    cy = np.sum((y + yn) * cr) / (6.0 * area)
    ixx = np.sum((x * x + x * xn + xn * xn) * cr) / 12.0 - area * cx * cx
    iyy = np.sum((y * y + y * yn + yn * yn) * cr) / 12.0 - area * cy * cy
    ixy = np.sum((x * yn + 2 * x * y + 2 * xn * yn + xn * y) * cr) / 24.0 - area * cx * cy
    return area, (cx, cy), np.array([[ixx, ixy], [ixy, iyy]]) / area


def extract_interface(phi: ScalarField, level: float = 0.5) -> InterfaceStats:
    """Largest closed {phi = level} contour with its perimeter, area and shape."""
    g = phi.grid
    best = None
    for c in measure.find_contours(phi.values, level):
        if c.shape[0] < 4 or not np.allclose(c[0], c[-1]):
            continue
        xy = c * g.h
        area, cen, cov = _polygon_moments(xy)
        if best is None or abs(area) > abs(best[1]):
            best = (xy, area, cen, cov)
    if best is None:
        raise EmptyInterfaceError(f"no closed phi={level} contour")
    xy, area, cen, cov = best
    if area < 0:
        xy = xy[::-1]
        area, cen, cov = _polygon_moments(xy)
    ev = np.linalg.eigvalsh(cov)
    aspect = float(np.sqrt(ev[1] / ev[0])) if ev[0] > 0 else float("inf")
    perimeter = float(np.sum(np.hypot(*np.diff(xy, axis=0).T)))
    return InterfaceStats(xy, perimeter, float(area), aspect, (float(cen[0]), float(cen[1])))


def classify_state(defects, stats: InterfaceStats | None, params: ModelParams,
                   max_order: float | None = None,
                   thresholds: Thresholds = DEFAULT_THRESHOLDS) -> str:
    t = thresholds
    if stats is None:
        return "isotropic"
    if max_order is not None and max_order < t.isotropic_order * params.s_plus:
        return "isotropic"
    charges = [d.charge for d in defects]
    aspect = stats.aspect_ratio
    if len(defects) == 1 and charges[0] == 1.0:
        d = defects[0]
        if np.hypot(d.x - stats.centroid[0], d.y - stats.centroid[1]) <= t.centroid_radius \
                and aspect < t.radial_max_aspect:
            return "radial"
    two_half = len(defects) == 2 and all(c == 0.5 for c in charges)
    if two_half and t.polar_min_aspect <= aspect < t.tactoid_min_aspect:
        return "polar"
    if (two_half or not defects) and aspect >= t.tactoid_min_aspect:
        return "tactoid"
    return "other"


def summarize(P: PTensorField, phi: ScalarField, params: ModelParams,
              thresholds: Thresholds = DEFAULT_THRESHOLDS) -> dict:
    """JSON-ready summary of a state."""
    defects = detect_defects(P, phi, thresholds=thresholds)
    try:
        stats = extract_interface(phi, thresholds.phi_min)
    except EmptyInterfaceError:
        stats = None
    nematic = phi.values > thresholds.phi_min
    max_order = float(order_field(P)[nematic].max()) if np.any(nematic) else 0.0
    label = classify_state(defects, stats, params, max_order, thresholds)
    e = energy_total(P, phi, params)
    return {
        "label": label,
        "defects": [{"x": d.x, "y": d.y, "charge": d.charge} for d in defects],
        "perimeter": stats.perimeter if stats else None,
        "area": stats.area if stats else None,
        "aspect_ratio": stats.aspect_ratio if stats else None,
        "centroid": list(stats.centroid) if stats else None,
        "sup_abs_P": float(np.sqrt(P.norm2().max())),
        "max_order": max_order,
        "energy": e.as_dict(),
        "thresholds": asdict(thresholds),
    }


def write_summary(path, summary: dict) -> None:
    _atomic_write_text(path, json.dumps(summary, indent=2) + "\n")
