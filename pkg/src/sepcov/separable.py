"""Separable approximations of a space-time covariance kernel.

Three maps take a kernel A on (K1 x K2)^2 to a separable kernel
a1(s,s') * a2(t,t') / z:

* the trace approximation, built from the two partial traces and the
  kernel trace;
* the partial-product approximation, built from contractions against a
  user-chosen temporal weight kernel psi;
* the SPCA approximation, the leading eigenpair of the two "flip"
  kernels, which is L2-optimal among rank-one separable kernels.

Every map leaves separable kernels fixed and commutes with positive
scaling.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .covariance import DenseCovariance
from .errors import DegenerateKernelError, GridError, SpectralDegeneracyError
from .grids import MarginalKernel, ProductGrid
from .linalg import sym_eig_top2

__all__ = [
    "ApproxKind",
    "SeparableKernel",
    "SpcaDiagnostics",
    "approx_trace",
    "approx_product",
    "approx_spca",
    "flip_kernels",
    "trace_approx_from_marginals",
]

_TRACE_RTOL = 1e-12
_PRODUCT_RTOL = 1e-12
_EIGENGAP_RTOL = 1e-10


@dataclass(frozen=True)
class ApproxKind:
    """Which separable approximation to use; ``product`` carries psi."""

    kind: str
    psi: MarginalKernel | None = None

    def __post_init__(self):
        if self.kind not in ("trace", "product", "spca"):
            raise ValueError(f"unknown approximation kind {self.kind!r}")
        if self.kind == "product" and self.psi is None:
            raise ValueError("product approximation requires a psi kernel")


@dataclass(frozen=True)
class SpcaDiagnostics:
    lambda1: float
    lambda2: float
    sign_flipped: bool

    @property
    def gap(self) -> float:
        return self.lambda1 - self.lambda2


@dataclass(frozen=True)
class SeparableKernel:
    """a1(s,s') * a2(t,t') / normalizer on a product grid."""

    grid: ProductGrid
    factor1: MarginalKernel
    factor2: MarginalKernel
    normalizer: float

    def __post_init__(self):
        if len(self.factor1.axis) != len(self.grid.spatial) or len(
            self.factor2.axis
        ) != len(self.grid.temporal):
            raise GridError("factor axes do not match the product grid")
        if self.normalizer == 0.0 or not np.isfinite(self.normalizer):
            raise DegenerateKernelError("separable kernel normalizer must be nonzero")

    def eval_block(self, rows, cols) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.intp)
        cols = np.asarray(cols, dtype=np.intp)
        d = self.grid.size
        if rows.size and (rows.min() < 0 or rows.max() >= d):
            raise GridError("row indices out of range")
        if cols.size and (cols.min() < 0 or cols.max() >= d):
            raise GridError("column indices out of range")
        t_len = len(self.grid.temporal)
        sr, tr = np.divmod(rows, t_len)
        sc, tc = np.divmod(cols, t_len)
        return (
            self.factor1.values[np.ix_(sr, sc)]
            * self.factor2.values[np.ix_(tr, tc)]
            / self.normalizer
        )

    def full(self) -> np.ndarray:
        """Dense (S*T) x (S*T) matrix of kernel values."""
        return (
            np.kron(self.factor1.values, self.factor2.values) / self.normalizer
        )

    def sup_scale(self) -> float:
        return float(
            np.abs(self.factor1.values).max()
            * np.abs(self.factor2.values).max()
            / abs(self.normalizer)
        )

    def trace(self) -> float:
        return self.factor1.trace() * self.factor2.trace() / self.normalizer

    def partial_trace_1(self) -> MarginalKernel:
        scale = self.factor2.trace() / self.normalizer
        return MarginalKernel(self.factor1.axis, self.factor1.values * scale)

    def partial_trace_2(self) -> MarginalKernel:
        scale = self.factor1.trace() / self.normalizer
        return MarginalKernel(self.factor2.axis, self.factor2.values * scale)


def _domain_measure(grid: ProductGrid) -> float:
    return float(
        grid.spatial.quad_weights.sum() * grid.temporal.quad_weights.sum()
    )


def _sup_scale(source) -> float:
    """Cheap upper proxy for the sup-norm of the source kernel."""
    if hasattr(source, "sup_scale"):
        return float(source.sup_scale())
    if isinstance(source, DenseCovariance):
        return float(np.abs(source.matrix).max())
    # PSD covariance: sup |C| equals the maximal diagonal value
    flat = source._flat
    return float(np.einsum("ni,ni->i", flat, flat).max() / source.n_obs)


def trace_approx_from_marginals(
    grid: ProductGrid,
    total_trace: float,
    pt1: MarginalKernel,
    pt2: MarginalKernel,
    scale: float,
) -> SeparableKernel:
    """Assemble the trace approximation from precomputed summaries."""
    if abs(total_trace) <= _TRACE_RTOL * max(scale * _domain_measure(grid), 1e-300):
        raise DegenerateKernelError(
            f"kernel trace {total_trace:.3e} too small for the trace approximation"
        )
    return SeparableKernel(grid, pt1, pt2, total_trace)


def approx_trace(source) -> SeparableKernel:
    """Trace approximation: partial traces over the kernel trace."""
    return trace_approx_from_marginals(
        source.grid,
        source.trace(),
        source.partial_trace_1(),
        source.partial_trace_2(),
        _sup_scale(source),
    )


def approx_product(source, psi: MarginalKernel) -> SeparableKernel:
    """Partial-product approximation for a symmetric temporal kernel psi."""
    a1, a2 = source.partial_product_marginals(psi)
    norm_sq = a1.l2_norm_sq()
    scale = _sup_scale(source) * float(np.abs(psi.values).max())
    grid = source.grid
    if np.sqrt(norm_sq) <= _PRODUCT_RTOL * max(
        scale * _domain_measure(grid) ** 2, 1e-300
    ):
        raise DegenerateKernelError(
            "first partial-product marginal vanishes; choose a different psi"
        )
    return SeparableKernel(grid, a1, a2, norm_sq)


def flip_kernels(dense: DenseCovariance):
    """The two quadratic contraction kernels whose top eigenpairs drive SPCA.

    Returns (f1, f2, w1, w2): f1 is S^2 x S^2 and f2 is T^2 x T^2 after
    flattening the argument pairs; w1, w2 are the induced product-measure
    quadrature weights for those flattened indices.
    """
    k = dense.tensor()
    sw = dense.grid.spatial.quad_weights
    tw = dense.grid.temporal.quad_weights
    s, t = dense.grid.shape
    f1 = np.einsum("swuv,xvyw,w,v->suxy", k, k, tw, tw).reshape(s * s, s * s)
    f2 = np.einsum("utvw,vxuy,u,v->twxy", k, k, sw, sw).reshape(t * t, t * t)
    f1 = (f1 + f1.T) / 2.0
    f2 = (f2 + f2.T) / 2.0
    w1 = np.outer(sw, sw).ravel()
    w2 = np.outer(tw, tw).ravel()
    return f1, f2, w1, w2


def _leading_eigenfunction(f: np.ndarray, w: np.ndarray, n: int):
    """Top eigenpair of the kernel matrix under the weighted inner product.

    The weighted problem is symmetrized as W^(1/2) F W^(1/2); the returned
    eigenfunction is L2-normalized w.r.t. the weights and symmetrized as an
    n x n kernel.
    """
    sq = np.sqrt(w)
    m = f * np.outer(sq, sq)
    (lam1, y1), (lam2, _) = sym_eig_top2(m)
    if lam1 - lam2 <= _EIGENGAP_RTOL * max(abs(lam1), 1e-300):
        raise SpectralDegeneracyError(
            f"leading eigenvalues {lam1:.6e} and {lam2:.6e} are too close "
            "for a well-defined rank-one factor",
            lambda1=lam1,
            lambda2=lam2,
        )
    v = (y1 / sq).reshape(n, n)
    v = (v + v.T) / 2.0
    # L2 normalization under the axis product weights
    wn = w.reshape(n, n)
    norm_sq = float(np.sum(wn * v**2))
    if norm_sq <= 1e-24:
        raise SpectralDegeneracyError(
            "leading eigenfunction is antisymmetric; no rank-one factor",
            lambda1=lam1,
            lambda2=lam2,
        )
    return lam1, lam2, v / np.sqrt(norm_sq)


def approx_spca(dense: DenseCovariance):
    """SPCA approximation sqrt(lambda1) * v1 (x) u1, with diagnostics.

    Signs are fixed so the approximation is positively aligned with the
    input kernel under the quadrature inner product.
    """
    f1, f2, w1, w2 = flip_kernels(dense)
    s, t = dense.grid.shape
    lam1_a, lam2_a, v1 = _leading_eigenfunction(f1, w1, s)
    lam1_b, lam2_b, u1 = _leading_eigenfunction(f2, w2, t)
    lam1 = (lam1_a + lam1_b) / 2.0
    sw = dense.grid.spatial.quad_weights
    tw = dense.grid.temporal.quad_weights
    align = float(
        np.einsum("stuv,su,tv,s,t,u,v->", dense.tensor(), v1, u1, sw, tw, sw, tw)
    )
    flipped = align < 0.0
    if flipped:
        u1 = -u1
    sep = SeparableKernel(
        dense.grid,
        MarginalKernel(dense.grid.spatial, v1),
        MarginalKernel(dense.grid.temporal, u1),
        1.0 / np.sqrt(lam1),
    )
    diag = SpcaDiagnostics(
        lambda1=lam1, lambda2=max(lam2_a, lam2_b), sign_flipped=flipped
    )
    return sep, diag


def apply_approximation(source, kind: ApproxKind) -> SeparableKernel:
    """Dispatch one of the three approximation maps."""
    if kind.kind == "trace":
        return approx_trace(source)
    if kind.kind == "product":
        return approx_product(source, kind.psi)
    dense = source if isinstance(source, DenseCovariance) else source.materialize()
    sep, _ = approx_spca(dense)
    return sep
