"""Node-centred fields on the unit square with homogeneous Dirichlet boundary.

Arrays are indexed ``a[i, j]`` with ``x = i*h`` and ``y = j*h``.
"""
from __future__ import annotations

import csv
import io
import os
import tempfile
from dataclasses import dataclass

import numpy as np


class FieldFormatError(ValueError):
    """Raised when a field CSV file does not match the expected layout."""


@dataclass(frozen=True)
class Grid2D:
    n: int

    def __post_init__(self):
        if self.n < 8:
            raise ValueError(f"grid needs at least 8 nodes per side, got {self.n}")

    @property
    def h(self) -> float:
        return 1.0 / (self.n - 1)

    @property
    def coords(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n)

    def mesh(self):
        x = self.coords
        return np.meshgrid(x, x, indexing="ij")

    def boundary_mask(self) -> np.ndarray:
        m = np.zeros((self.n, self.n), dtype=bool)
        m[0, :] = m[-1, :] = m[:, 0] = m[:, -1] = True
        return m

    def interior_mask(self) -> np.ndarray:
        return ~self.boundary_mask()

    def weights(self) -> np.ndarray:
        """Trapezoidal quadrature weights (corners h^2/4, edges h^2/2)."""
        w1 = np.ones(self.n)
        w1[0] = w1[-1] = 0.5
        return np.outer(w1, w1) * self.h ** 2


@dataclass
class ScalarField:
    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n, self.grid.n):
            raise ValueError("field shape does not match grid")

    @classmethod
    def zeros(cls, grid: Grid2D) -> "ScalarField":
        return cls(grid, np.zeros((grid.n, grid.n)))

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())

    def satisfies_dirichlet(self) -> bool:
        return bool(np.all(self.values[self.grid.boundary_mask()] == 0.0))


@dataclass
class PTensorField:
    grid: Grid2D
    p11: np.ndarray
    p12: np.ndarray

    def __post_init__(self):
        self.p11 = np.asarray(self.p11, dtype=float)
        self.p12 = np.asarray(self.p12, dtype=float)
        shape = (self.grid.n, self.grid.n)
        if self.p11.shape != shape or self.p12.shape != shape:
            raise ValueError("tensor field shape does not match grid")

    @classmethod
    def zeros(cls, grid: Grid2D) -> "PTensorField":
        return cls(grid, np.zeros((grid.n, grid.n)), np.zeros((grid.n, grid.n)))

    def copy(self) -> "PTensorField":
        return PTensorField(self.grid, self.p11.copy(), self.p12.copy())

    def norm2(self) -> np.ndarray:
        """Frobenius |P|^2 = 2 (p11^2 + p12^2) at every node."""
        return 2.0 * (self.p11 ** 2 + self.p12 ** 2)

    def satisfies_dirichlet(self) -> bool:
        b = self.grid.boundary_mask()
        return bool(np.all(self.p11[b] == 0.0) and np.all(self.p12[b] == 0.0))


def _values(f):
    return f.values if isinstance(f, ScalarField) else np.asarray(f, dtype=float)


def grad_array(a: np.ndarray, h: float):
    """Central differences inside, second-order one-sided on the boundary."""
    return np.gradient(a, h, edge_order=2)


def gradient(f: ScalarField):
    gx, gy = grad_array(f.values, f.grid.h)
    return gx, gy


def laplacian_array(a: np.ndarray, h: float) -> np.ndarray:
    out = np.zeros_like(a)
    out[1:-1, 1:-1] = (a[2:, 1:-1] + a[:-2, 1:-1] + a[1:-1, 2:] + a[1:-1, :-2]
                       - 4.0 * a[1:-1, 1:-1]) / (h * h)
    return out


def laplacian(f: ScalarField) -> ScalarField:
    """5-point Laplacian; boundary output is 0 since Dirichlet nodes never move."""
    return ScalarField(f.grid, laplacian_array(f.values, f.grid.h))


def divergence_array(vx: np.ndarray, vy: np.ndarray, h: float) -> np.ndarray:
    out = np.zeros_like(vx)
    out[1:-1, 1:-1] = ((vx[2:, 1:-1] - vx[:-2, 1:-1]) + (vy[1:-1, 2:] - vy[1:-1, :-2])) / (2.0 * h)
    return out


def divergence(vx, vy, grid: Grid2D) -> ScalarField:
    return ScalarField(grid, divergence_array(np.asarray(vx, float), np.asarray(vy, float), grid.h))


def edge_energy(a: np.ndarray) -> float:
    """Sum of squared nearest-neighbour differences over all grid edges.

    Equals the integral of |grad a|^2 for the edge (staggered) discretisation;
    its derivative with respect to interior node values is -2 h^2 times the
    5-point Laplacian.
    """
    dx = np.diff(a, axis=0)
    dy = np.diff(a, axis=1)
    return float(np.sum(dx * dx) + np.sum(dy * dy))


def edge_grad_sq(a: np.ndarray, h: float) -> np.ndarray:
    """Nodal |grad a|^2: half the sum of squared differences on adjacent edges.

    ``h^2 * edge_grad_sq(a, h).sum() == edge_energy(a)`` exactly.
    """
    dx2 = (np.diff(a, axis=0) / h) ** 2
    dy2 = (np.diff(a, axis=1) / h) ** 2
    out = np.zeros_like(a)
    out[1:, :] += dx2
    out[:-1, :] += dx2
    out[:, 1:] += dy2
    out[:, :-1] += dy2
    return 0.5 * out


def integrate(f, grid: Grid2D | None = None) -> float:
    """Trapezoidal quadrature over the unit square."""
    if isinstance(f, ScalarField):
        grid = f.grid
    a = _values(f)
    if grid is None:
        grid = Grid2D(a.shape[0])
    return float(np.sum(grid.weights() * a))


CSV_HEADER = ["i", "j", "x", "y", "phi", "p11", "p12"]


def _atomic_write_text(path, text: str) -> None:
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_csv(path, phi: ScalarField, P: PTensorField) -> None:
    """Write ``i,j,x,y,phi,p11,p12`` rows, j varying fastest, repr precision."""
    if phi.grid != P.grid:
        raise ValueError("phi and P live on different grids")
    g = phi.grid
    x = g.coords
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for i in range(g.n):
        for j in range(g.n):
            w.writerow([i, j, repr(float(x[i])), repr(float(x[j])), repr(float(phi.values[i, j])),
                        repr(float(P.p11[i, j])), repr(float(P.p12[i, j]))])
    _atomic_write_text(path, buf.getvalue())


def load_csv(path):
    """Read a field file written by :func:`save_csv`; returns ``(phi, P)``."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != CSV_HEADER:
        raise FieldFormatError(f"{path}: expected header {','.join(CSV_HEADER)}")
    body = rows[1:]
    n = int(round(np.sqrt(len(body))))
    if n * n != len(body) or n < 8:
        raise FieldFormatError(f"{path}: {len(body)} data rows is not n^2 for a grid with n >= 8")
    try:
        data = np.array([[float(v) for v in r[4:7]] for r in body])
        idx = np.array([[int(r[0]), int(r[1])] for r in body])
    except (ValueError, IndexError) as exc:
        raise FieldFormatError(f"{path}: malformed row ({exc})") from None
    if not np.all(np.isfinite(data)):
        raise FieldFormatError(f"{path}: non-finite values")
    expect = np.array([[i, j] for i in range(n) for j in range(n)])
    if not np.array_equal(idx, expect):
        raise FieldFormatError(f"{path}: rows are not in row-major (i, j) order")
    grid = Grid2D(n)
    phi = ScalarField(grid, data[:, 0].reshape(n, n))
    P = PTensorField(grid, data[:, 1].reshape(n, n), data[:, 2].reshape(n, n))
    return phi, P
