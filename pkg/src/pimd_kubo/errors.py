"""Exception and warning types shared across the package."""


class InsufficientSamples(ValueError):
    """Raised when an estimator receives fewer samples than its blocking needs."""


class NonErgodicWarning(UserWarning):
    """Monte Carlo acceptance rate left the trustworthy window after burn-in."""


class GridEscape(RuntimeError):
    """A centroid trajectory left the tabulated force range."""


class GridTooCoarse(ValueError):
    """Time grid too coarse for the requested finite-difference derivative."""


class QuadratureFailure(RuntimeError):
    """Adaptive quadrature could not reach the requested absolute accuracy."""


class SpectralIncomplete(ValueError):
    """Retained eigenbasis does not span the thermal density at this beta."""


class BoundaryLeak(ValueError):
    """A retained eigenstate has non-negligible amplitude at the grid edge."""


class UnsupportedObservable(TypeError):
    """Observable kind not admissible for the requested operation."""


class ConfigError(ValueError):
    """Run-configuration parse or validation error, with source position."""

    def __init__(self, message, line=None, key=None):
        self.line = line
        self.key = key
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
