"""Pydantic models for the recon package."""

from typing import Any

from typing_extensions import Self

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.sparse.linalg import LinearOperator, aslinearoperator

from src.model.models import as_float_array
from src.solvers import SolverControl


class SynergyBankMatrix(BaseModel):
    """Bank of time-shifted synergies used to reconstruct testing movements.

    Attributes:
        columns: Array of shape (n * T_test, number of columns); every
            column is one synergy placed at one shift, stacked time-major.
        column_labels: (synergy index, shift) of every column.
        n: Joint count.
        T_test: Testing window length.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    columns: np.ndarray
    column_labels: tuple[tuple[int, int], ...]
    n: int = Field(ge=1)
    T_test: int = Field(ge=1)

    @field_validator("columns", mode="before")
    @classmethod
    def convert_columns(cls, value: Any) -> np.ndarray:
        return as_float_array(value, ndim=2)

    @model_validator(mode="after")
    def check_columns(self) -> Self:
        if self.columns.shape[0] != self.n * self.T_test:
            raise ValueError(f"columns must have length n*T_test={self.n * self.T_test}")
        if self.columns.shape[1] != len(self.column_labels):
            raise ValueError("one label per column is required")
        if len(set(self.column_labels)) != len(self.column_labels):
            raise ValueError("column labels must be unique")
        return self

    @property
    def ncols(self) -> int:
        return self.columns.shape[1]

    @property
    def synergies(self) -> list[int]:
        return sorted({j for j, _ in self.column_labels})

    def select(self, indices: list[int]) -> "SynergyBankMatrix":
        """Bank restricted to the given columns, in the given order."""
        return SynergyBankMatrix(
            columns=self.columns[:, indices].reshape(self.columns.shape[0], len(indices)),
            column_labels=tuple(self.column_labels[i] for i in indices),
            n=self.n,
            T_test=self.T_test,
        )

    def operator(self) -> LinearOperator:
        return aslinearoperator(self.columns)


class FilterParams(BaseModel):
    """Savitzky-Golay window and polynomial order."""

    model_config = ConfigDict(frozen=True)

    window: int = 11
    polyorder: int = 3


class ReconParams(BaseModel):
    """Parameters of the testing phase.

    Attributes:
        lambda_test: l1 weight of the testing LASSO.
        lambda_test_grid: Candidates scored on a validation split; when set
            it replaces lambda_test.
        tau: Correlation threshold of the bank pruning.
        filter: Smoothing applied to the bank columns (None: no smoothing).
        control: Solver settings of the testing LASSO.
    """

    lambda_test: float = Field(default=0.01, ge=0)
    lambda_test_grid: list[float] | None = None
    tau: float = Field(default=0.8, ge=0, le=1)
    filter: FilterParams | None = FilterParams()
    control: SolverControl = SolverControl()


class GestureReconstruction(BaseModel):
    """Result of reconstructing one movement from the bank."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    coeffs: np.ndarray
    v_hat: np.ndarray
    error: float


class TaskRecord(BaseModel):
    """Per-task line of an evaluation report."""

    task_id: int
    error: float
    nnz_coeffs: int


class ReportSummary(BaseModel):
    """Aggregates of an evaluation report.

    mean and std are None (and mean_defined False) for an empty test set;
    std is the population standard deviation.
    """

    mean: float | None
    std: float | None
    mean_defined: bool
    columns_total: int
    columns_kept: int
    m_active: int
    lambda_test: float
    tau: float


class EvaluationReport(BaseModel):
    """Evaluation of a trained bank on a test set.

    The reconstructions (one row per task, time-major) are kept alongside
    for plotting and are not part of the JSON document.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    schema_version: int = 1
    records: list[TaskRecord]
    summary: ReportSummary
    reconstructions: np.ndarray = Field(exclude=True)

    def to_csv_rows(self) -> list[list[str]]:
        """Report as CSV rows: a header, one row per task, then the summary."""
        rows = [["task_id", "error", "nnz_coeffs"]]
        rows += [[str(r.task_id), repr(r.error), str(r.nnz_coeffs)] for r in self.records]
        summary = self.summary
        rows.append(["mean", "" if summary.mean is None else repr(summary.mean), ""])
        rows.append(["std", "" if summary.std is None else repr(summary.std), ""])
        rows.append(["columns_kept", str(summary.columns_kept), ""])
        rows.append(["m_active", str(summary.m_active), ""])
        return rows
