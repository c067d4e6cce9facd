"""Exception hierarchy shared by all modules."""


class AsydimError(Exception):
    """Base class for package errors."""


class DomainError(AsydimError, ValueError):
    """An argument lies outside the domain of an operation."""


class EstimationError(AsydimError):
    """Not enough valid scales to produce an estimate."""


class NumericalError(AsydimError, ArithmeticError):
    """A numerical routine (eigensolver, quadrature) failed."""


class DiscretizationError(AsydimError):
    """A net failed its separation or covering certificate."""

    def __init__(self, message, worst_point=None, worst_distance=None):
        super().__init__(message)
        self.worst_point = worst_point
        self.worst_distance = worst_distance


class ResourceError(AsydimError, MemoryError):
    """A request exceeds the configured memory budget."""


class ConfigError(AsydimError):
    """Invalid command-line or JSON run configuration."""


class SaturationWarning(UserWarning):
    """Time grid reaches the regime where a finite graph stops emulating an infinite one."""
