"""Sup-norm separability tests for space-time covariance kernels."""

__version__ = "0.1.0"

from .bootstrap import BootstrapConfig, TestReport, run_test
from .covariance import DenseCovariance, FunctionalSample, LazyCovariance, center
from .errors import (
    DegenerateKernelError,
    GridError,
    ResourceBudgetError,
    SampleFormatError,
    SepcovError,
    SpectralDegeneracyError,
)
from .estimator import SeparabilityTest, as_sample, make_psi
from .grids import AxisGrid, GridFunction, MarginalKernel, ProductGrid, sup_norm
from .sample_io import read_sample, write_sample
from .separable import (
    ApproxKind,
    SeparableKernel,
    approx_product,
    approx_spca,
    approx_trace,
)
from .simulate import ExperimentResult, SimConfig, SimKernelParams, run_experiment
from .statistic import DeviationResult, RelativeMeasure, relative_measure, sup_deviation

__all__ = [
    "__version__",
    "ApproxKind",
    "AxisGrid",
    "BootstrapConfig",
    "DegenerateKernelError",
    "DenseCovariance",
    "DeviationResult",
    "ExperimentResult",
    "FunctionalSample",
    "GridError",
    "GridFunction",
    "LazyCovariance",
    "MarginalKernel",
    "ProductGrid",
    "RelativeMeasure",
    "ResourceBudgetError",
    "SampleFormatError",
    "SeparabilityTest",
    "SeparableKernel",
    "SepcovError",
    "SimConfig",
    "SimKernelParams",
    "SpectralDegeneracyError",
    "TestReport",
    "approx_product",
    "approx_spca",
    "approx_trace",
    "as_sample",
    "center",
    "make_psi",
    "read_sample",
    "relative_measure",
    "run_experiment",
    "run_test",
    "sup_deviation",
    "sup_norm",
    "write_sample",
]
