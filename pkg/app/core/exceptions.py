"""
Errors raised across the unmixing project.
"""


class HsuError(Exception):
    """Base class for every error raised by the project."""


class ConfigError(HsuError, ValueError):
    """Invalid solver or run configuration."""


class DataError(HsuError, ValueError):
    """Invalid or inconsistent numerical input."""


class DimensionMismatch(DataError):
    pass


class NonFiniteInput(DataError):
    pass


class OutOfRange(DataError):
    pass


class NegativeThreshold(DataError):
    pass


class EmptySignal(DataError):
    pass


class NotPositiveDefinite(DataError):
    pass


class GridTooLargeForDense(DataError):
    pass


class TooLarge(DataError):
    pass


class ZeroReference(DataError):
    pass


class ZeroColumn(DataError):
    pass


class ZeroSignal(DataError):
    pass


class TooManyEndmembers(DataError):
    pass


class UnreachableCoherence(DataError):
    pass


class BadMagic(DataError):
    pass


class TruncatedFile(DataError):
    pass


class MalformedCsv(DataError):
    pass


class Diverged(HsuError):
    """A solver produced NaN or Inf; `report` holds the run so far."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
