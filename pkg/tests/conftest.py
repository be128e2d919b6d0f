"""Shared fixtures and kernel/sample factories."""

import numpy as np
import pytest

from sepcov.covariance import DenseCovariance, FunctionalSample, LazyCovariance
from sepcov.grids import AxisGrid, MarginalKernel, ProductGrid


def make_grid(s: int, t: int) -> ProductGrid:
    """Equidistant product grid on (0, 1] x (0, 1]."""
    return ProductGrid(
        AxisGrid.from_points(np.arange(1, s + 1) / s),
        AxisGrid.from_points(np.arange(1, t + 1) / t),
    )


def random_sample(rng, n: int, s: int, t: int, smooth: bool = False) -> FunctionalSample:
    x = rng.standard_normal((n, s, t))
    if smooth:
        # correlated surfaces: running means along both axes
        x = (x + np.roll(x, 1, axis=1) + np.roll(x, 1, axis=2)) / 3.0
    return FunctionalSample(make_grid(s, t), x)


def random_psd_marginal(rng, axis: AxisGrid, rank: int | None = None) -> MarginalKernel:
    n = len(axis)
    rank = rank or n
    f = rng.standard_normal((n, rank))
    return MarginalKernel(axis, f @ f.T / rank)


def random_separable_dense(rng, s: int, t: int) -> DenseCovariance:
    """A random PSD separable kernel as a dense covariance."""
    grid = make_grid(s, t)
    a1 = random_psd_marginal(rng, grid.spatial)
    a2 = random_psd_marginal(rng, grid.temporal)
    return DenseCovariance(grid, np.kron(a1.values, a2.values))


def random_psd_dense(rng, s: int, t: int, rank: int | None = None) -> DenseCovariance:
    grid = make_grid(s, t)
    d = grid.size
    rank = rank or d
    f = rng.standard_normal((d, rank))
    return DenseCovariance(grid, f @ f.T / rank)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
