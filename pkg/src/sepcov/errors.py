"""Exception hierarchy shared across the package."""


class SepcovError(Exception):
    """Base class for all package-specific errors."""


class GridError(SepcovError, ValueError):
    """Invalid grid, shape mismatch, or out-of-range index."""


class DegenerateKernelError(SepcovError, ArithmeticError):
    """A separable approximation is undefined (vanishing trace or marginal)."""


class SpectralDegeneracyError(DegenerateKernelError):
    """Leading eigenvalue gap too small for a well-defined SPCA factor."""

    def __init__(self, message, lambda1, lambda2):
        super().__init__(message)
        self.lambda1 = lambda1
        self.lambda2 = lambda2


class ResourceBudgetError(SepcovError, MemoryError):
    """A dense materialization would exceed the configured memory budget."""

    def __init__(self, message, required_bytes, budget_bytes):
        super().__init__(message)
        self.required_bytes = required_bytes
        self.budget_bytes = budget_bytes


class ConvergenceError(SepcovError, ArithmeticError):
    """An iterative solver failed to reach its residual tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SampleFormatError(SepcovError, ValueError):
    """A sample file failed to parse."""
