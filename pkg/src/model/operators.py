"""Matrix-free time-shift operators of the convolutive mixture model.

None of the functions below builds a shift matrix D_jk or a Toeplitz
dictionary D(s^j); every product is evaluated by slicing the template into
the observation window (or, for adjoints, by correlating the residual with
the template over sliding windows).
"""

import logging
from typing import Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.sparse.linalg import LinearOperator

from src.exceptions import DimensionError, ShiftRangeError

from .models import CoefficientSet, ShiftPlan, SynergyBank

logger = logging.getLogger(__name__)


def _joint_count(template: np.ndarray, T_s: int) -> int:
    if template.ndim != 1 or template.size == 0 or template.size % T_s:
        raise DimensionError(
            f"template of length {template.size} is not a multiple of T_s={T_s}"
        )
    return template.size // T_s


def _check_length(vector: np.ndarray, expected: int, name: str) -> None:
    if vector.ndim != 1 or vector.size != expected:
        raise DimensionError(f"{name} must have length {expected}, got shape {vector.shape}")


def _shifted_sum(
    template: np.ndarray, coeffs: np.ndarray, shifts: Sequence[int], T: int, T_s: int
) -> np.ndarray:
    """Sum_k coeffs[k] * (template placed at shifts[k]) as a time-major vector."""
    n = _joint_count(template, T_s)
    columns = template.reshape(n, T_s).T
    out = np.zeros((T, n))
    for amplitude, shift in zip(coeffs, shifts):
        if amplitude != 0.0:
            out[shift : shift + T_s] += amplitude * columns
    return out.ravel()


def _windows(residual: np.ndarray, shifts: Sequence[int], n: int, T: int, T_s: int) -> np.ndarray:
    """Residual segments starting at every shift, shaped (K, n, T_s)."""
    _check_length(residual, n * T, "residual")
    return sliding_window_view(residual.reshape(T, n), T_s, axis=0)[list(shifts)]


def apply_shift(template: np.ndarray, shift: int, n: int, T: int, T_s: int) -> np.ndarray:
    """Place a template at a given delay inside the observation window (D_jk s^j).

    Args:
        template: Joint-major template of length n * T_s.
        shift: Delay in samples, 0 <= shift <= T - T_s.
        n: Number of joints.
        T: Window length.
        T_s: Template length.

    Raises:
        ShiftRangeError: Raised when the shifted template would not fit the window.
        DimensionError: Raised when the template length is not n * T_s.

    Returns:
        Time-major vector of length n * T, zero outside the shifted template.
    """
    template = np.asarray(template, dtype=float)
    _check_length(template, n * T_s, "template")
    if not 0 <= shift <= T - T_s:
        raise ShiftRangeError(f"shift {shift} outside [0, {T - T_s}]")
    return _shifted_sum(template, np.ones(1), (shift,), T, T_s)


def dictionary_apply(
    template: np.ndarray, coeffs: np.ndarray, plan: ShiftPlan, synergy: int = 0
) -> np.ndarray:
    """Evaluate D(s^j) c_j, the Toeplitz dictionary of one template times its coefficients.

    Args:
        template: Joint-major template of length n * T_s.
        coeffs: Coefficients c_j, one per shift of the synergy in the plan.
        plan: Shift plan providing T, T_s and the shifts.
        synergy: Index of the synergy whose shift grid is used.

    Raises:
        DimensionError: Raised when coeffs does not match the number of shifts.

    Returns:
        Time-major vector of length n * T.
    """
    template = np.asarray(template, dtype=float)
    coeffs = np.asarray(coeffs, dtype=float)
    _check_length(coeffs, plan.K(synergy), "coeffs")
    return _shifted_sum(template, coeffs, plan.shifts[synergy], plan.T, plan.T_s)


def dictionary_adjoint_apply(
    template: np.ndarray, residual: np.ndarray, plan: ShiftPlan, synergy: int = 0
) -> np.ndarray:
    """Evaluate D(s^j)^T r; entry k is the inner product of the k-th shifted template with r.

    Raises:
        DimensionError: Raised when residual does not have length n * T.

    Returns:
        Vector of length K_j.
    """
    template = np.asarray(template, dtype=float)
    residual = np.asarray(residual, dtype=float)
    n = _joint_count(template, plan.T_s)
    windows = _windows(residual, plan.shifts[synergy], n, plan.T, plan.T_s)
    return np.einsum("kit,it->k", windows, template.reshape(n, plan.T_s))


def coefficient_operator_apply(
    coeffs: np.ndarray, x: np.ndarray, plan: ShiftPlan, synergy: int = 0
) -> np.ndarray:
    """Evaluate B_j(c) x = (Sum_k c_jk D_jk) x.

    The model is bilinear in (template, coefficients), so this shares its
    arithmetic with dictionary_apply and returns identical values.

    Raises:
        DimensionError: Raised when x or coeffs have the wrong length.
    """
    x = np.asarray(x, dtype=float)
    coeffs = np.asarray(coeffs, dtype=float)
    if x.ndim != 1 or x.size % plan.T_s:
        raise DimensionError(f"x of length {x.size} is not a multiple of T_s={plan.T_s}")
    _check_length(coeffs, plan.K(synergy), "coeffs")
    return _shifted_sum(x, coeffs, plan.shifts[synergy], plan.T, plan.T_s)


def coefficient_operator_adjoint_apply(
    coeffs: np.ndarray, residual: np.ndarray, n: int, plan: ShiftPlan, synergy: int = 0
) -> np.ndarray:
    """Evaluate B_j(c)^T r, a joint-major vector of length n * T_s.

    Raises:
        DimensionError: Raised when coeffs or residual have the wrong length.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    residual = np.asarray(residual, dtype=float)
    _check_length(coeffs, plan.K(synergy), "coeffs")
    windows = _windows(residual, plan.shifts[synergy], n, plan.T, plan.T_s)
    return np.einsum("k,kit->it", coeffs, windows).ravel()


def reconstruct_task(
    bank: SynergyBank, coeffs_for_task: Sequence[np.ndarray], plan: ShiftPlan
) -> np.ndarray:
    """Forward model of one task: Sum_j D(s^j) c_j over the active synergies.

    Args:
        bank: Synergy bank (inactive synergies are skipped).
        coeffs_for_task: One coefficient vector per synergy of the bank.
        plan: Shift plan of the bank.

    Raises:
        DimensionError: Raised when the bank, plan and coefficients disagree.

    Returns:
        Time-major velocity vector of length n * T.
    """
    if len(coeffs_for_task) != bank.m or plan.m != bank.m or plan.T_s != bank.T_s:
        raise DimensionError(
            f"bank has {bank.m} synergies (T_s={bank.T_s}), plan has {plan.m} "
            f"(T_s={plan.T_s}), coefficients given for {len(coeffs_for_task)}"
        )
    out = np.zeros(bank.n * plan.T)
    for j in bank.active_indices:
        out += dictionary_apply(bank.template(j), coeffs_for_task[j], plan, synergy=j)
    return out


def reconstruct(bank: SynergyBank, coeffs: CoefficientSet, plan: ShiftPlan) -> np.ndarray:
    """Reconstruct every task of a coefficient set, returned as a (G, n * T) array."""
    if coeffs.sizes != plan.sizes:
        raise DimensionError("coefficient block sizes do not match the shift plan")
    if coeffs.G == 0:
        return np.zeros((0, bank.n * plan.T))
    return np.stack([reconstruct_task(bank, coeffs.task_blocks(g), plan) for g in range(coeffs.G)])


def block_operator(
    bank: SynergyBank, plan: ShiftPlan, synergies: Sequence[int] | None = None
) -> LinearOperator:
    """The block dictionary [D(s^j1) | D(s^j2) | ...] as a scipy LinearOperator.

    Args:
        bank: Synergy bank.
        plan: Shift plan of the bank.
        synergies: Synergy indices to include, defaults to the active ones.

    Returns:
        Operator of shape (n * T, sum of K_j over the selected synergies);
        matvec is the forward model, rmatvec the stacked adjoints.
    """
    selected = bank.active_indices if synergies is None else list(synergies)
    sizes = [plan.K(j) for j in selected]
    offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    rows = bank.n * plan.T

    def matvec(c: np.ndarray) -> np.ndarray:
        c = np.ravel(c)
        out = np.zeros(rows)
        for position, j in enumerate(selected):
            block = c[offsets[position] : offsets[position + 1]]
            if np.any(block):
                out += dictionary_apply(bank.template(j), block, plan, synergy=j)
        return out

    def rmatvec(r: np.ndarray) -> np.ndarray:
        r = np.ravel(r)
        if not selected:
            return np.zeros(0)
        return np.concatenate(
            [dictionary_adjoint_apply(bank.template(j), r, plan, synergy=j) for j in selected]
        )

    return LinearOperator(
        shape=(rows, int(offsets[-1])), matvec=matvec, rmatvec=rmatvec, dtype=float
    )


def group_null_threshold(bank: SynergyBank, plan: ShiftPlan, v: np.ndarray) -> float:
    """Smallest group weight lambda_1 (with lambda_2 = 0) giving all-zero C-step coefficients.

    Equals max_j ||D(s^j)^T v||_2 over the active synergies.
    """
    norms = [
        np.linalg.norm(dictionary_adjoint_apply(bank.template(j), v, plan, synergy=j))
        for j in bank.active_indices
    ]
    return float(max(norms, default=0.0))
