"""Discretized domains, quadrature rules and sup-norms.

A space-time surface lives on the product of two 1-D axis grids.  All
integrals in the package are weighted sums against Riemann cell weights
attached to the axes (uniform on equidistant grids), and the sup-norm is
the maximum absolute value over grid points.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridError

__all__ = [
    "AxisGrid",
    "ProductGrid",
    "GridFunction",
    "MarginalKernel",
    "riemann_weights",
    "sup_norm",
    "integrate_1d",
    "integrate_2d",
]


def riemann_weights(points) -> np.ndarray:
    """Riemann cell weights for an ordered 1-D point set.

    Each point is weighted by the width of its cell: cell boundaries sit
    at the midpoints between neighbours, and the two end cells extend
    half the adjacent spacing beyond the end points.  On an equidistant
    grid with spacing d every weight equals d, so integrals are plain
    scaled sums and no grid point is privileged.  A single point gets
    weight 1 (counting measure).
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 1 or pts.size == 0:
        raise GridError("grid points must be a nonempty 1-D sequence")
    if pts.size == 1:
        return np.ones(1)
    d = np.diff(pts)
    if np.any(d <= 0):
        raise GridError("grid points must be strictly increasing")
    mid = (pts[:-1] + pts[1:]) / 2.0
    lo = np.concatenate(([pts[0] - d[0] / 2.0], mid))
    hi = np.concatenate((mid, [pts[-1] + d[-1] / 2.0]))
    return hi - lo


@dataclass(frozen=True)
class AxisGrid:
    """One coordinate axis: ordered points plus quadrature weights."""

    points: np.ndarray
    quad_weights: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        w = np.asarray(self.quad_weights, dtype=float)
        if pts.ndim != 1 or pts.size == 0:
            raise GridError("axis needs at least one point")
        if pts.size > 1 and np.any(np.diff(pts) <= 0):
            raise GridError("axis points must be strictly increasing")
        if w.shape != pts.shape:
            raise GridError("weights must match points in length")
        if np.any(w <= 0):
            raise GridError("quadrature weights must be positive")
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "quad_weights", w)

    @classmethod
    def from_points(cls, points) -> "AxisGrid":
        pts = np.asarray(points, dtype=float)
        return cls(pts, riemann_weights(pts))

    @classmethod
    def uniform(cls, n: int, start: float = 0.0, stop: float = 1.0) -> "AxisGrid":
        return cls.from_points(np.linspace(start, stop, n))

    def __len__(self) -> int:
        return self.points.size


@dataclass(frozen=True)
class ProductGrid:
    """Spatial x temporal product grid with S*T total points."""

    spatial: AxisGrid
    temporal: AxisGrid

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.spatial), len(self.temporal))

    @property
    def size(self) -> int:
        s, t = self.shape
        return s * t

    def flat_weights(self) -> np.ndarray:
        """Quadrature weights for the flattened (s-major) index."""
        return np.outer(self.spatial.quad_weights, self.temporal.quad_weights).ravel()

    def unravel(self, flat_index: int) -> tuple[int, int]:
        s, t = divmod(int(flat_index), len(self.temporal))
        return s, t


@dataclass(frozen=True)
class GridFunction:
    """A surface f(s, t) sampled on a product grid."""

    grid: ProductGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise GridError(
                f"values shape {v.shape} does not match grid shape {self.grid.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise GridError("function values must be finite")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class MarginalKernel:
    """A symmetric kernel a(x, x') on a single axis grid."""

    axis: AxisGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        n = len(self.axis)
        if v.shape != (n, n):
            raise GridError(f"kernel shape {v.shape} does not match axis length {n}")
        if not np.all(np.isfinite(v)):
            raise GridError("kernel values must be finite")
        # store exact symmetry, tolerating round-off in the input
        if not np.allclose(v, v.T, rtol=0.0, atol=1e-10 * (1.0 + np.abs(v).max())):
            raise GridError("kernel values must be symmetric")
        v = (v + v.T) / 2.0
        object.__setattr__(self, "values", v)

    def l2_norm_sq(self) -> float:
        """Squared L2 norm under the axis quadrature, integral of a(x,x')^2."""
        w = self.axis.quad_weights
        return float(np.einsum("i,ij,j->", w, self.values**2, w))

    def trace(self) -> float:
        """Integral of the diagonal a(x, x)."""
        return float(self.axis.quad_weights @ np.diag(self.values))


def sup_norm(values) -> float:
    """Maximum absolute entry of a gridded array."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise GridError("sup-norm of an empty array is undefined")
    if not np.all(np.isfinite(v)):
        raise GridError("sup-norm requires finite values")
    return float(np.abs(v).max())


def integrate_1d(values, grid: AxisGrid) -> float:
    """Weighted sum approximating the integral of f over the axis."""
    v = np.asarray(values, dtype=float)
    if v.shape != (len(grid),):
        raise GridError(f"value shape {v.shape} does not match axis length {len(grid)}")
    return float(grid.quad_weights @ v)


def integrate_2d(values, grid_a: AxisGrid, grid_b: AxisGrid) -> float:
    """Weighted double sum approximating the integral of f over a product."""
    v = np.asarray(values, dtype=float)
    if v.shape != (len(grid_a), len(grid_b)):
        raise GridError(
            f"value shape {v.shape} does not match axes ({len(grid_a)}, {len(grid_b)})"
        )
    return float(grid_a.quad_weights @ v @ grid_b.quad_weights)
