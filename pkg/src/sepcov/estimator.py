"""Scikit-learn style front end for the separability test."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .bootstrap import BootstrapConfig, run_test
from .covariance import FunctionalSample
from .grids import AxisGrid, MarginalKernel, ProductGrid
from .separable import ApproxKind

__all__ = ["SeparabilityTest", "make_psi", "as_sample"]


def make_psi(name: str, temporal: AxisGrid) -> MarginalKernel:
    """Named temporal weight kernels for the partial-product approximation."""
    pts = temporal.points
    if name == "const":
        values = np.ones((pts.size, pts.size))
    elif name == "cosine":
        values = np.cos(pts[:, None] - pts[None, :])
    else:
        raise ValueError(f"unknown psi choice {name!r}; use 'const' or 'cosine'")
    return MarginalKernel(temporal, values)


def as_sample(X, spatial_points=None, temporal_points=None) -> FunctionalSample:
    """Coerce an (N, S, T) array into a FunctionalSample.

    Axis coordinates default to equidistant grids on (0, 1].
    """
    if isinstance(X, FunctionalSample):
        return X
    arr = np.asarray(X, dtype=float)
    if arr.ndim != 3:
        raise ValueError(
            f"expected an array of shape (n_samples, n_spatial, n_temporal); got {arr.shape}"
        )
    n, s, t = arr.shape
    if n < 2:
        raise ValueError("need at least 2 sample surfaces")
    spatial = np.arange(1, s + 1) / s if spatial_points is None else spatial_points
    temporal = np.arange(1, t + 1) / t if temporal_points is None else temporal_points
    grid = ProductGrid(AxisGrid.from_points(spatial), AxisGrid.from_points(temporal))
    return FunctionalSample(grid, arr)


class SeparabilityTest(BaseEstimator):
    """Bootstrap test for separability of a space-time covariance kernel.

    Parameters
    ----------
    approx : {'trace', 'product', 'spca'}
        Separable approximation used by the test statistic.
    psi : {'const', 'cosine'}
        Temporal weight kernel for the product approximation.
    replicates : int
        Number of bootstrap replicates.
    block_length : int or None
        Multiplier dependence bandwidth; None picks a default from the
        sample size.
    alpha : float
        Nominal test level.
    seed : int
        Base seed for the replicate RNG streams.

    Attributes
    ----------
    statistic_ : float
        Sup-norm deviation between the empirical covariance and its
        separable approximation.
    p_value_ : float
    quantile_ : float
    reject_ : bool
    report_ : TestReport
    """

    def __init__(
        self,
        approx="trace",
        psi="const",
        replicates=400,
        block_length=None,
        alpha=0.05,
        seed=0,
    ):
        self.approx = approx
        self.psi = psi
        self.replicates = replicates
        self.block_length = block_length
        self.alpha = alpha
        self.seed = seed

    def fit(self, X, y=None):
        """Run the test on an (N, S, T) array or FunctionalSample."""
        sample = as_sample(X)
        if self.approx == "product":
            kind = ApproxKind("product", make_psi(self.psi, sample.grid.temporal))
        else:
            kind = ApproxKind(self.approx)
        config = BootstrapConfig(
            replicates=self.replicates,
            block_length=self.block_length,
            alpha=self.alpha,
            seed=self.seed,
            kind=kind,
        )
        report = run_test(sample, config)
        self.report_ = report
        self.statistic_ = report.statistic.sup_dev
        self.p_value_ = report.p_value
        self.quantile_ = report.quantile
        self.reject_ = report.reject
        self.boot_values_ = report.boot_values
        return self

    def predict(self, X=None):
        """Return the fitted decision: 1 rejects separability, 0 keeps it."""
        if not hasattr(self, "reject_"):
            raise AttributeError("call fit before predict")
        return int(self.reject_)
