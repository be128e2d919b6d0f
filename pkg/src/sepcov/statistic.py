"""Sup-norm deviation between a covariance and its separable approximation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateKernelError, GridError
from .separable import ApproxKind, SeparableKernel, apply_approximation

__all__ = ["DeviationResult", "RelativeMeasure", "sup_deviation", "relative_measure"]

DEFAULT_BLOCK_SIZE = 1024


@dataclass(frozen=True)
class DeviationResult:
    """Maximal absolute deviation, its grid location, and the sqrt(N)-scaled value."""

    sup_dev: float
    argmax: tuple[int, int, int, int]  # (s, t, s', t')
    scaled: float


def _block_ranges(d: int, block: int):
    for start in range(0, d, block):
        yield np.arange(start, min(start + block, d))


def sup_deviation(cov, sep: SeparableKernel, block_size: int | None = None) -> DeviationResult:
    """Exact sup-norm of (covariance - separable approximation), blockwise.

    Scans all index pairs in row-major order using at most two
    block_size x block_size scratch arrays; the result does not depend on
    the block size.  Ties in the argmax go to the first occurrence.
    """
    if cov.grid is not sep.grid and cov.grid.shape != sep.grid.shape:
        raise GridError("covariance and approximation live on different grids")
    d = cov.size
    block = block_size or DEFAULT_BLOCK_SIZE
    if block < 1:
        raise GridError("block size must be positive")
    best = -1.0
    best_idx = (0, 0)
    for rows in _block_ranges(d, block):
        for cols in _block_ranges(d, block):
            diff = np.abs(cov.eval_block(rows, cols) - sep.eval_block(rows, cols))
            flat = int(np.argmax(diff))
            i, j = divmod(flat, cols.size)
            val = float(diff[i, j])
            cand = (int(rows[i]), int(cols[j]))
            if val > best or (val == best and cand < best_idx):
                best = val
                best_idx = cand
    s, t = cov.grid.unravel(best_idx[0])
    s2, t2 = cov.grid.unravel(best_idx[1])
    n_obs = getattr(cov, "n_obs", None)
    scaled = float(np.sqrt(n_obs) * best) if n_obs else float("nan")
    return DeviationResult(sup_dev=best, argmax=(s, t, s2, t2), scaled=scaled)


@dataclass(frozen=True)
class RelativeMeasure:
    value: float
    kind: ApproxKind


def covariance_sup_norm(cov) -> float:
    """Sup-norm of a PSD covariance: the maximal diagonal value."""
    if hasattr(cov, "matrix"):
        return float(np.abs(cov.matrix).max())
    flat = cov._flat
    return float(np.einsum("ni,ni->i", flat, flat).max() / cov.n_obs)


def relative_measure(cov, kind: ApproxKind, block_size: int | None = None) -> RelativeMeasure:
    """Unit-free separability diagnostic: sup deviation over the covariance sup-norm."""
    denom = covariance_sup_norm(cov)
    if denom <= 0.0:
        raise DegenerateKernelError("covariance vanishes; relative measure undefined")
    sep = apply_approximation(cov, kind)
    dev = sup_deviation(cov, sep, block_size=block_size)
    return RelativeMeasure(value=dev.sup_dev / denom, kind=kind)
