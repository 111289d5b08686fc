"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ConfigurationError -> 2,
NumericalIntegrityError -> 3, ConvergenceError / CoverageError -> 4.
"""


class WedgeEchoError(Exception):
    """Base class for all package errors."""


class ConfigurationError(WedgeEchoError):
    """Invalid geometry, units, grid or run configuration."""


class SamplingError(ConfigurationError):
    """Rejection sampling failed (geometry/temperature mismatch)."""


class NumericalIntegrityError(WedgeEchoError):
    """A numerical invariant was violated (norm drift, |F| > 1, leakage)."""


class ConvergenceError(WedgeEchoError):
    """An iterative method failed to reach its tolerance."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class CoverageError(ConvergenceError):
    """A spectral basis does not cover enough thermal weight."""
