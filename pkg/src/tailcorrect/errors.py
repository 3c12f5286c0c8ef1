"""Exception hierarchy.

Each class carries the CLI exit code it maps to, so the command layer does
not need its own translation table.
"""


class TailCorrectError(Exception):
    exit_code = 1


class SpecError(TailCorrectError, ValueError):
    """Malformed density or test specification."""

    exit_code = 2


class DivergenceError(TailCorrectError):
    """The defining integral of K_g does not appear to converge."""

    exit_code = 3


class DegenerateSampleError(TailCorrectError, ValueError):
    """Zero sample variance: the statistic is undefined."""

    exit_code = 4


class BudgetError(TailCorrectError):
    exit_code = 5


class FiniteDifferenceError(TailCorrectError):
    """Evaluations of G are noisier than the finite-difference step allows."""

    exit_code = 6


class EmptyExceedanceError(TailCorrectError):
    """No p-value fell below the slope-estimation threshold."""

    exit_code = 7


class ExpansionDomainError(TailCorrectError, ValueError):
    """Threshold too small for the two-term tail expansion to be meaningful."""
