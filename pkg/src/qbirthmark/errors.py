"""Exception types raised across the package."""


class BirthmarkError(Exception):
    """Base class for all package errors."""


class InvalidDimensionError(BirthmarkError, ValueError):
    pass


class NormalizationError(BirthmarkError, ValueError):
    pass


class ShapeError(BirthmarkError, ValueError):
    pass


class DomainError(BirthmarkError, ValueError):
    pass


class ConfigurationError(BirthmarkError, ValueError):
    """Invalid experiment or estimator configuration.

    ``field`` names the offending configuration entry when known.
    """

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


class CapacityError(BirthmarkError, ValueError):
    pass


class DegenerateFitError(BirthmarkError, ArithmeticError):
    pass


class EigenSolverError(BirthmarkError, RuntimeError):
    """Eigensolver failed; ``seed`` reproduces the offending matrix."""

    def __init__(self, message, seed=None):
        super().__init__(f"{message} (matrix seed={seed})")
        self.seed = seed


class OutputError(BirthmarkError, OSError):
    pass
