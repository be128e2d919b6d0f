"""Empirical covariance of a functional sample.

The covariance of N surfaces on an S x T grid is an (S*T) x (S*T) object.
``LazyCovariance`` keeps only the centered data and evaluates covariance
blocks, the trace and all marginal summaries by streaming over the
observations, so the full operator never has to be stored.  A dense
materialization is available behind an explicit memory budget for the
algorithms that genuinely need it (SPCA, partial-product bootstrap).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridError, ResourceBudgetError
from .grids import AxisGrid, MarginalKernel, ProductGrid

__all__ = [
    "FunctionalSample",
    "LazyCovariance",
    "DenseCovariance",
    "center",
]


@dataclass(frozen=True)
class FunctionalSample:
    """N observed surfaces on a shared product grid."""

    grid: ProductGrid
    observations: np.ndarray = field(repr=False)  # (N, S, T)
    centered: bool = False

    def __post_init__(self):
        obs = np.asarray(self.observations, dtype=float)
        if obs.ndim != 3 or obs.shape[1:] != self.grid.shape:
            raise GridError(
                f"observations shape {obs.shape} does not match grid {self.grid.shape}"
            )
        if not np.all(np.isfinite(obs)):
            raise GridError("observations must be finite")
        object.__setattr__(self, "observations", obs)

    @property
    def n_obs(self) -> int:
        return self.observations.shape[0]


def center(sample: FunctionalSample) -> FunctionalSample:
    """Subtract the pointwise sample mean from every observation."""
    if sample.n_obs < 1:
        raise GridError("cannot center an empty sample")
    if sample.centered:
        return sample
    mean = sample.observations.mean(axis=0)
    return FunctionalSample(sample.grid, sample.observations - mean, centered=True)


class LazyCovariance:
    """Empirical covariance represented by centered data.

    All queries stream over the N observations; memory stays at
    O(N*S*T + S^2 + T^2).
    """

    def __init__(self, sample: FunctionalSample):
        if sample.n_obs < 2:
            raise GridError("covariance estimation needs at least 2 observations")
        sample = center(sample)
        self.sample = sample
        self.grid = sample.grid
        self.n_obs = sample.n_obs
        # flattened s-major view, shape (N, S*T)
        self._flat = sample.observations.reshape(self.n_obs, -1)

    @property
    def size(self) -> int:
        return self.grid.size

    def eval_block(self, rows, cols) -> np.ndarray:
        """Covariance values for flat index sets ``rows`` x ``cols``."""
        rows = np.asarray(rows, dtype=np.intp)
        cols = np.asarray(cols, dtype=np.intp)
        d = self.size
        if rows.size and (rows.min() < 0 or rows.max() >= d):
            raise GridError("row indices out of range")
        if cols.size and (cols.min() < 0 or cols.max() >= d):
            raise GridError("column indices out of range")
        return self._flat[:, rows].T @ self._flat[:, cols] / self.n_obs

    def trace(self) -> float:
        """Integral of the covariance diagonal, streamed from the data."""
        w = self.grid.flat_weights()
        return float(np.einsum("ni,i,ni->", self._flat, w, self._flat) / self.n_obs)

    def partial_trace_1(self) -> MarginalKernel:
        """Spatial marginal kernel: temporal-diagonal integral of the covariance."""
        x = self.sample.observations
        tw = self.grid.temporal.quad_weights
        k = np.einsum("nst,t,nut->su", x, tw, x) / self.n_obs
        return MarginalKernel(self.grid.spatial, (k + k.T) / 2.0)

    def partial_trace_2(self) -> MarginalKernel:
        """Temporal marginal kernel: spatial-diagonal integral of the covariance."""
        x = self.sample.observations
        sw = self.grid.spatial.quad_weights
        k = np.einsum("nst,s,nsu->tu", x, sw, x) / self.n_obs
        return MarginalKernel(self.grid.temporal, (k + k.T) / 2.0)

    def partial_product_marginals(self, psi: MarginalKernel):
        """Partial-product marginals for a symmetric temporal weight kernel psi.

        The first marginal contracts the covariance against psi over both
        temporal arguments; the second contracts the covariance against the
        first marginal over both spatial arguments.  Both are accumulated
        per observation without forming the covariance.
        """
        if psi.values.shape != (len(self.grid.temporal),) * 2:
            raise GridError("psi must be a kernel on the temporal axis")
        x = self.sample.observations
        sw = self.grid.spatial.quad_weights
        tw = self.grid.temporal.quad_weights
        # h_n(s, w') = int x_n(s, w) psi(w, w') dw
        h = np.einsum("nsw,w,wv->nsv", x, tw, psi.values)
        a1 = np.einsum("nsv,v,nuv->su", h, tw, x) / self.n_obs
        a1 = MarginalKernel(self.grid.spatial, (a1 + a1.T) / 2.0)
        a2 = (
            np.einsum("nut,u,uv,v,nvw->tw", x, sw, a1.values, sw, x) / self.n_obs
        )
        a2 = MarginalKernel(self.grid.temporal, (a2 + a2.T) / 2.0)
        return a1, a2

    def materialize(self, budget_bytes: int = 1 << 31) -> "DenseCovariance":
        """Full (S*T) x (S*T) covariance matrix, guarded by a memory budget."""
        d = self.size
        required = d * d * 8
        if required > budget_bytes:
            raise ResourceBudgetError(
                f"dense covariance needs {required} bytes, budget is {budget_bytes}",
                required_bytes=required,
                budget_bytes=budget_bytes,
            )
        m = self._flat.T @ self._flat / self.n_obs
        return DenseCovariance(self.grid, (m + m.T) / 2.0)


class DenseCovariance:
    """A materialized space-time kernel as a flat symmetric matrix.

    Also used for non-PSD perturbed kernels inside the bootstrap, so only
    symmetry is enforced here.
    """

    def __init__(self, grid: ProductGrid, matrix: np.ndarray):
        m = np.asarray(matrix, dtype=float)
        d = grid.size
        if m.shape != (d, d):
            raise GridError(f"matrix shape {m.shape} does not match grid size {d}")
        if not np.allclose(m, m.T, rtol=0.0, atol=1e-8 * (1.0 + np.abs(m).max())):
            raise GridError("covariance matrix must be symmetric")
        self.grid = grid
        self.matrix = (m + m.T) / 2.0

    @property
    def size(self) -> int:
        return self.grid.size

    def tensor(self) -> np.ndarray:
        """(S, T, S, T) view of the kernel values."""
        s, t = self.grid.shape
        return self.matrix.reshape(s, t, s, t)

    def eval_block(self, rows, cols) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.intp)
        cols = np.asarray(cols, dtype=np.intp)
        return self.matrix[np.ix_(rows, cols)]

    def trace(self) -> float:
        w = self.grid.flat_weights()
        return float(w @ np.diag(self.matrix))

    def partial_trace_1(self) -> MarginalKernel:
        k = np.einsum("stut,t->su", self.tensor(), self.grid.temporal.quad_weights)
        return MarginalKernel(self.grid.spatial, (k + k.T) / 2.0)

    def partial_trace_2(self) -> MarginalKernel:
        k = np.einsum("stsu,s->tu", self.tensor(), self.grid.spatial.quad_weights)
        return MarginalKernel(self.grid.temporal, (k + k.T) / 2.0)

    def partial_product_marginals(self, psi: MarginalKernel):
        if psi.values.shape != (len(self.grid.temporal),) * 2:
            raise GridError("psi must be a kernel on the temporal axis")
        k = self.tensor()
        sw = self.grid.spatial.quad_weights
        tw = self.grid.temporal.quad_weights
        a1 = np.einsum("swuv,w,v,wv->su", k, tw, tw, psi.values)
        a1 = MarginalKernel(self.grid.spatial, (a1 + a1.T) / 2.0)
        a2 = np.einsum("utvw,u,v,uv->tw", k, sw, sw, a1.values)
        a2 = MarginalKernel(self.grid.temporal, (a2 + a2.T) / 2.0)
        return a1, a2
