"""Exceptions raised across the synergies package."""

from typing import Sequence


class SynergyError(Exception):
    """Base class for all errors raised by the package."""


class ConfigurationError(SynergyError):
    """Raised when a parameter or a combination of parameters is invalid."""


class DimensionError(SynergyError, ValueError):
    """Raised when vector or operator dimensions do not agree."""


class ShiftRangeError(SynergyError, IndexError):
    """Raised when a time shift would place a template outside the window."""


class InputError(SynergyError, ValueError):
    """Raised when input data is unusable (non-finite values, too short, ...)."""


class DatasetParseError(SynergyError):
    """Raised when a dataset file does not follow the documented CSV layout.

    Attributes:
        row: 1-based line number of the offending row, if known.
        column: 1-based column number of the offending cell, if known.
    """

    def __init__(self, message: str, row: int | None = None, column: int | None = None) -> None:
        self.row = row
        self.column = column
        location = ""
        if row is not None:
            location = f" (row {row}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + location)


class SolverError(SynergyError):
    """Raised when a convex subproblem solver cannot proceed."""


class StepError(SynergyError):
    """Raised when a C-step or S-step fails for a given task or synergy.

    Attributes:
        step: Name of the failing step ('c_step' or 's_step').
        index: 0-based task index (C-step) or synergy index (S-step).
    """

    def __init__(self, step: str, index: int, reason: str) -> None:
        self.step = step
        self.index = index
        subject = "task" if step == "c_step" else "synergy"
        super().__init__(f"{step} failed for {subject} {index}: {reason}")


class DivergenceError(SynergyError):
    """Raised when the alternating minimization produces a non-finite objective.

    Attributes:
        trace: Objective values recorded up to the failure.
    """

    def __init__(self, message: str, trace: Sequence[float]) -> None:
        self.trace = list(trace)
        super().__init__(f"{message}; objective trace: {self.trace}")


class DegenerateInputError(SynergyError, ValueError):
    """Raised when a metric is undefined for the given input."""


class IllConditionedWarning(UserWarning):
    """Emitted when a linear system is (numerically) rank deficient."""
