"""Exception hierarchy shared by every wgeom module."""


class WGError(Exception):
    """Base class for all wgeom errors."""


class DomainError(WGError, ValueError):
    """A parameter or argument lies outside its mathematical domain."""


class CapExceededError(DomainError):
    """An integer argument exceeds a documented practical cap."""


class InfeasibleEstimateError(WGError, ValueError):
    """A closed-form estimator has no admissible solution for the given data."""


class SingularInformationError(WGError, ArithmeticError):
    """The observed information matrix cannot be inverted."""


class DataFormatError(WGError, ValueError):
    """Malformed frequency-table input.  ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
