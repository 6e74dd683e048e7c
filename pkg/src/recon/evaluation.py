"""Reconstruction of testing movements and the normalized reconstruction error."""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

import numpy as np

from src.exceptions import DegenerateInputError, DimensionError
from src.model import ShiftPlan, SynergyBank, VelocityDataset
from src.solvers import SolverControl, lasso_null_threshold, lasso_solve

from .bank import build_bank, prune_correlated, smooth_bank
from .models import (
    EvaluationReport,
    FilterParams,
    GestureReconstruction,
    ReportSummary,
    SynergyBankMatrix,
    TaskRecord,
)

logger = logging.getLogger(__name__)


def normalized_error(v: np.ndarray, v_hat: np.ndarray) -> float:
    """Squared reconstruction error divided by the signal energy.

    Sum_{i,t} (v - v_hat)^2 / Sum_{i,t} v^2. A zero movement reconstructed
    as zero has error 0.

    Raises:
        DimensionError: Raised when the lengths differ.
        DegenerateInputError: Raised when v is zero but v_hat is not.
    """
    v = np.asarray(v, dtype=float)
    v_hat = np.asarray(v_hat, dtype=float)
    if v.shape != v_hat.shape:
        raise DimensionError(f"shapes differ: {v.shape} and {v_hat.shape}")
    energy = float(np.sum(v**2))
    if energy == 0.0:
        if np.any(v_hat):
            raise DegenerateInputError(
                "error undefined: zero movement with nonzero reconstruction"
            )
        return 0.0
    return float(np.sum((v - v_hat) ** 2)) / energy


def coefficient_null_threshold(bank_matrix: SynergyBankMatrix, v: np.ndarray) -> float:
    """Smallest lambda_test giving all-zero testing coefficients: ||B^T v||_inf."""
    if bank_matrix.ncols == 0:
        return 0.0
    return lasso_null_threshold(bank_matrix.operator(), v)


def reconstruct_gesture(
    bank_matrix: SynergyBankMatrix,
    v_test: np.ndarray,
    lambda_test: float,
    control: SolverControl | None = None,
) -> GestureReconstruction:
    """Fit one movement with an l1-regularized least squares over the bank.

    Args:
        bank_matrix: Pruned (and smoothed) testing bank.
        v_test: Time-major velocities of length n * T_test.
        lambda_test: l1 weight.
        control: Solver settings.

    Raises:
        DimensionError: Raised when v_test does not match the bank.

    Returns:
        Coefficients, reconstruction and normalized error.
    """
    v_test = np.asarray(v_test, dtype=float)
    if v_test.shape != (bank_matrix.columns.shape[0],):
        raise DimensionError(
            f"v_test must have length {bank_matrix.columns.shape[0]}, got shape {v_test.shape}"
        )
    if bank_matrix.ncols == 0:
        coeffs = np.zeros(0)
        v_hat = np.zeros_like(v_test)
    else:
        coeffs = lasso_solve(bank_matrix.operator(), v_test, lambda_test, control).coeffs
        v_hat = bank_matrix.columns @ coeffs
    return GestureReconstruction(coeffs=coeffs, v_hat=v_hat, error=normalized_error(v_test, v_hat))


def _prepare_bank(
    bank: SynergyBank,
    T_test: int,
    tau: float,
    filter_params: FilterParams | None,
    plan: ShiftPlan | None,
) -> tuple[SynergyBankMatrix, int]:
    matrix = build_bank(bank, T_test, plan)
    columns_total = matrix.ncols
    matrix = prune_correlated(matrix, tau)
    if filter_params is not None:
        matrix = smooth_bank(matrix, filter_params.window, filter_params.polyorder)
    return matrix, columns_total


def evaluate_suite(
    bank: SynergyBank,
    dataset_test: VelocityDataset,
    lambda_test: float,
    tau: float = 0.8,
    filter_params: FilterParams | None = FilterParams(),
    control: SolverControl | None = None,
    plan: ShiftPlan | None = None,
    threads: int | None = None,
) -> EvaluationReport:
    """Evaluate a trained bank on every movement of a test set.

    Builds the bank for the testing window once, prunes correlated columns,
    smooths them, then reconstructs each movement independently (on a
    thread pool, merged by task index).

    Args:
        bank: Trained synergy bank.
        dataset_test: Testing movements.
        lambda_test: l1 weight of the testing LASSO.
        tau: Correlation threshold of the pruning.
        filter_params: Column smoothing, None to skip.
        control: Solver settings.
        plan: Shift plan of the testing window.
        threads: Worker threads, defaults to all cores.

    Returns:
        The report with per-task errors, their mean and standard deviation
        and the bank statistics; reconstructions travel alongside.
    """
    if dataset_test.n != bank.n:
        raise DimensionError(f"bank has n={bank.n} joints, test data has n={dataset_test.n}")
    matrix, columns_total = _prepare_bank(bank, dataset_test.T, tau, filter_params, plan)
    if bank.m_active == 0:
        logger.warning("Evaluating an empty synergy bank: every reconstruction is zero")

    def solve(g: int) -> GestureReconstruction:
        return reconstruct_gesture(matrix, dataset_test.task(g), lambda_test, control)

    workers = min(threads or os.cpu_count() or 1, max(dataset_test.G, 1))
    if workers == 1:
        results = [solve(g) for g in range(dataset_test.G)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(solve, range(dataset_test.G)))

    records = [
        TaskRecord(
            task_id=task_id,
            error=result.error,
            nnz_coeffs=int(np.count_nonzero(result.coeffs)),
        )
        for task_id, result in zip(dataset_test.task_ids, results)
    ]
    errors = np.array([r.error for r in records])
    if errors.size == 0:
        logger.warning("Empty test set: mean reconstruction error is undefined")
    summary = ReportSummary(
        mean=float(errors.mean()) if errors.size else None,
        std=float(errors.std()) if errors.size else None,
        mean_defined=bool(errors.size),
        columns_total=columns_total,
        columns_kept=matrix.ncols,
        m_active=bank.m_active,
        lambda_test=lambda_test,
        tau=tau,
    )
    reconstructions = (
        np.stack([r.v_hat for r in results])
        if results
        else np.zeros((0, dataset_test.n * dataset_test.T))
    )
    logger.info(
        "Evaluated %d movements: mean error %s over %d bank columns",
        dataset_test.G, summary.mean, matrix.ncols,
    )
    return EvaluationReport(records=records, summary=summary, reconstructions=reconstructions)


def select_lambda_test(
    bank: SynergyBank,
    validation: VelocityDataset,
    grid: Sequence[float],
    tau: float = 0.8,
    filter_params: FilterParams | None = FilterParams(),
    control: SolverControl | None = None,
    threads: int | None = None,
) -> float:
    """Pick the lambda_test of the grid with the smallest mean validation error.

    Ties go to the earlier grid value.
    """
    if not grid:
        raise ValueError("lambda_test grid must not be empty")
    scores = []
    for candidate in grid:
        report = evaluate_suite(
            bank, validation, candidate, tau, filter_params, control, threads=threads
        )
        mean = report.summary.mean
        scores.append(np.inf if mean is None else mean)
        logger.info("lambda_test=%g: validation error %s", candidate, mean)
    return float(grid[int(np.argmin(scores))])
