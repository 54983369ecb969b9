"""Exception hierarchy shared by the distanova modules."""

from __future__ import annotations


class DistanovaError(Exception):
    """Base class for all errors raised by distanova."""


class InvalidDistanceMatrixError(DistanovaError, ValueError):
    """The supplied matrix is not square, symmetric, or nonnegative."""


class InvalidAssignmentError(DistanovaError, ValueError):
    """Group labels are empty, mis-sized, or leave a group without members."""


class DimensionMismatchError(DistanovaError, ValueError):
    """Two operands do not have conformable shapes."""


class DegenerateWithinError(DistanovaError, ArithmeticError):
    """Within-group variability is zero, so the ratio statistic diverges."""


class DegenerateDistributionError(DistanovaError, ArithmeticError):
    """The permutation distribution is a point mass (zero variance)."""


class SingularMetricError(DistanovaError, ArithmeticError):
    """A sum-of-squares matrix required for a Mahalanobis-type metric is singular."""


class PoleError(DistanovaError, ArithmeticError):
    """A transform was evaluated exactly at its pole."""


class SampleSizeError(DistanovaError, ValueError):
    """The sample size is outside the range an operation supports."""


class DataFormatError(DistanovaError, ValueError):
    """An input file could not be parsed."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(where + message)
        self.path = path
        self.line = line
