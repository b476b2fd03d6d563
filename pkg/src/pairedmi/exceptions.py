"""Exception hierarchy.

``ValidationError`` subclasses signal bad input or configuration (CLI exit
code 1); ``ComputationError`` subclasses signal runtime failures of a
statistical procedure on otherwise valid input (CLI exit code 2).
"""


class PairedMIError(Exception):
    """Base class for all package errors."""


class ValidationError(PairedMIError, ValueError):
    """Input data or configuration violates a documented precondition."""


class ParameterError(ValidationError):
    """A numeric parameter lies outside its admissible range."""


class FormatError(ValidationError):
    """A CSV cell could not be parsed."""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class SizeError(ValidationError):
    """A combinatorial budget was exceeded."""


class ComputationError(PairedMIError, RuntimeError):
    """A procedure could not produce a result on the given data."""


class DegenerateVarianceError(ComputationError):
    """A variance needed by a statistic is zero."""


class RankError(ComputationError):
    """Too few observed rows for the regression design."""


class UndefinedMetricError(ComputationError):
    """A metric's normalizing denominator is zero."""
