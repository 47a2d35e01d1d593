"""Exception hierarchy shared by all visimp modules.

ParameterError covers bad call arguments (non-positive sigma, infeasible
crop specs); DataError covers malformed or inconsistent input data
(dimension mismatches, unreadable files, degenerate inputs a metric
cannot be defined on). The CLI maps ParameterError/DataError to exit
code 3 and anything unexpected to 4.
"""


class VisimpError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(VisimpError):
    """An argument value violates an operation's precondition."""


class DataError(VisimpError):
    """Input data is malformed, inconsistent, or degenerate."""


class CheckpointError(DataError):
    """A model checkpoint file is unreadable or inconsistent."""


class TrainingDivergedError(VisimpError):
    """Training loss became non-finite."""
