"""Construction, decorrelation and smoothing of the testing synergy bank."""

import logging

import numpy as np

from src.dataio import savitzky_golay
from src.dataio.preprocessing import check_filter_parameters
from src.exceptions import ConfigurationError
from src.model import ShiftPlan, SynergyBank, apply_shift

from .models import SynergyBankMatrix

logger = logging.getLogger(__name__)


def build_bank(bank: SynergyBank, T_test: int, plan: ShiftPlan | None = None) -> SynergyBankMatrix:
    """Place every active synergy at every shift of a testing window.

    Columns are ordered synergy-major, shift-minor, so the bank times a
    coefficient vector is the convolutive forward model with the
    coefficients concatenated per synergy.

    Args:
        bank: Trained synergy bank.
        T_test: Testing window length.
        plan: Shift plan for the testing window, defaults to the full
            uniform grid.

    Raises:
        ConfigurationError: Raised when T_s > T_test or the plan does not
            fit the window.

    Returns:
        The bank matrix.
    """
    if bank.T_s > T_test:
        raise ConfigurationError(
            f"synergy length T_s={bank.T_s} exceeds testing window T_test={T_test}"
        )
    plan = plan or ShiftPlan.uniform(T_test, bank.T_s, bank.m)
    if plan.T != T_test or plan.T_s != bank.T_s or plan.m != bank.m:
        raise ConfigurationError("shift plan does not match the bank and testing window")

    labels = [(j, shift) for j in bank.active_indices for shift in plan.shifts[j]]
    columns = np.zeros((bank.n * T_test, len(labels)))
    for position, (j, shift) in enumerate(labels):
        columns[:, position] = apply_shift(bank.template(j), shift, bank.n, T_test, bank.T_s)
    logger.debug("Built a bank of %d columns from %d synergies", len(labels), bank.m_active)
    return SynergyBankMatrix(
        columns=columns, column_labels=tuple(labels), n=bank.n, T_test=T_test
    )


def _standardized(columns: np.ndarray) -> np.ndarray:
    """Mean-centered, unit-norm columns; constant columns become zero."""
    centered = columns - columns.mean(axis=0)
    norms = np.linalg.norm(centered, axis=0)
    return np.divide(centered, norms, out=np.zeros_like(centered), where=norms > 0)


def prune_correlated(bank_matrix: SynergyBankMatrix, tau: float = 0.8) -> SynergyBankMatrix:
    """Greedily drop columns strongly correlated with an earlier kept column.

    Columns are visited in canonical order; a column is kept when its
    absolute Pearson correlation with every column kept so far is <= tau.
    A constant column has zero correlation with everything.

    Raises:
        ConfigurationError: Raised when tau is outside [0, 1].
    """
    if not 0.0 <= tau <= 1.0:
        raise ConfigurationError(f"tau must be in [0, 1], got {tau}")
    unit = _standardized(bank_matrix.columns)
    kept: list[int] = []
    for i in range(bank_matrix.ncols):
        if kept and np.max(np.abs(unit[:, kept].T @ unit[:, i])) > tau:
            continue
        kept.append(i)
    logger.info(
        "Correlation pruning kept %d of %d columns (tau=%g)", len(kept), bank_matrix.ncols, tau
    )
    return bank_matrix.select(kept)


def smooth_bank(
    bank_matrix: SynergyBankMatrix, window: int = 11, polyorder: int = 3
) -> SynergyBankMatrix:
    """Savitzky-Golay smooth every column, one joint's time series at a time.

    Raises:
        ConfigurationError: Raised for invalid filter parameters.
    """
    check_filter_parameters(bank_matrix.T_test, window, polyorder)
    if bank_matrix.ncols == 0:
        return bank_matrix
    per_joint = bank_matrix.columns.reshape(bank_matrix.T_test, bank_matrix.n, bank_matrix.ncols)
    smoothed = savitzky_golay(per_joint, window, polyorder, axis=0)
    return bank_matrix.model_copy(
        update={"columns": smoothed.reshape(bank_matrix.columns.shape)}
    )
