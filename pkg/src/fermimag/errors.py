"""Exception types shared across the package.

Numeric failures carry the best available estimate so callers can decide
whether a degraded answer is still usable.
"""


class AccuracyError(RuntimeError):
    """A quadrature or truncated sum did not reach the requested tolerance."""

    def __init__(self, message, achieved=None, estimate=None):
        super().__init__(message)
        self.achieved = achieved
        self.estimate = estimate


class ConvergenceError(RuntimeError):
    """An iterative solver ran out of iterations."""

    def __init__(self, message, last_iterate=None, residual=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual


class CancellationError(RuntimeError):
    """Catastrophic cancellation detected (e.g. fermionic recursion sign flip)."""


class ResourceLimitError(RuntimeError):
    """A configured memory or size budget would be exceeded."""


class ConfigError(ValueError):
    """Invalid experiment configuration; carries the full error list."""

    def __init__(self, problems):
        super().__init__("; ".join(problems))
        self.problems = list(problems)
