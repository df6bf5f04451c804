"""Exception hierarchy shared by every module.

Each class carries the process exit code the command line front end maps it
to, so library callers and the CLI agree on one classification of failures.
"""


class DisarrangementError(ValueError):
    exit_code = 1


class ParseError(DisarrangementError):
    exit_code = 2


class NotSymmetricError(DisarrangementError):
    exit_code = 3


class TraceError(DisarrangementError):
    exit_code = 3


class NoSignChangeError(DisarrangementError):
    """The restricted quadratic form is semidefinite and nonzero."""

    exit_code = 3


class DimensionMismatch(DisarrangementError):
    exit_code = 4


class UnsupportedDimension(DisarrangementError):
    exit_code = 5


class JumpConsistencyError(DisarrangementError):
    exit_code = 6


class OutsideGridError(DisarrangementError):
    exit_code = 7


class ConvergenceError(RuntimeError):
    """An iterative routine hit its iteration cap. Indicates a defect."""

    exit_code = 1
