"""Exception types shared across the toolkit."""


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class ValidationError(ValueError):
    """Malformed input data (axes, shapes, files, configuration)."""


class EmptyTargetZoneError(ValueError):
    """The time gate isolated no energy for at least one azimuth."""


class FitError(RuntimeError):
    """A distribution could not be fitted to the supplied samples."""


class ConvergenceError(FitError):
    """An optimizer exhausted its budget without a finite optimum."""
