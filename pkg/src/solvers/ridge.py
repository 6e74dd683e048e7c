"""Matrix-free ridge regression through conjugate gradient on the normal equations."""

import logging
import warnings

import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, cg, eigsh

from src.exceptions import DimensionError, IllConditionedWarning, InputError, SolverError

from .models import SolverControl
from .sparse_group_lasso import estimate_lipschitz

logger = logging.getLogger(__name__)

RANK_TOLERANCE = 1e-10


def _normal_operator(operator: LinearOperator, alpha: float) -> LinearOperator:
    cols = operator.shape[1]
    return LinearOperator(
        shape=(cols, cols),
        matvec=lambda s: operator.rmatvec(operator.matvec(np.ravel(s))) + alpha * np.ravel(s),
        dtype=float,
    )


def _is_rank_deficient(normal: LinearOperator, largest: float) -> bool:
    """Whether the smallest eigenvalue of B^T B is negligible next to the largest."""
    cols = normal.shape[0]
    if largest <= 0.0:
        return True
    if cols == 1:
        smallest = float(normal.matvec(np.ones(1))[0])
    else:
        try:
            smallest = float(eigsh(normal, k=1, which="SA", return_eigenvectors=False)[0])
        except ArpackNoConvergence:
            return True
    return smallest <= RANK_TOLERANCE * largest


def ridge_solve(
    operator: LinearOperator,
    target: np.ndarray,
    alpha: float,
    control: SolverControl | None = None,
    initial: np.ndarray | None = None,
) -> np.ndarray:
    """Minimize 1/2 ||target - B s||^2 + alpha/2 ||s||^2.

    Solves (B^T B + alpha I) s = B^T target with conjugate gradient using
    only products with B and B^T. The relative residual tolerance is
    control.rel_tol. With alpha = 0 the warm start is ignored so that the
    iterates stay in the row space of B and a rank-deficient system yields
    the minimum-norm solution; an IllConditionedWarning is emitted in that
    case.

    Args:
        operator: Linear operator B.
        target: Right-hand side in the output space of B.
        alpha: Ridge weight, alpha >= 0.
        control: Tolerance and iteration cap.
        initial: Optional warm start (used only when alpha > 0).

    Raises:
        InputError: Raised when alpha is negative or target is not finite.
        DimensionError: Raised when target does not match B.
        SolverError: Raised when conjugate gradient breaks down.

    Returns:
        The ridge solution s.
    """
    control = control or SolverControl()
    if alpha < 0:
        raise InputError(f"alpha must be non-negative, got {alpha}")
    target = np.asarray(target, dtype=float)
    if target.shape != (operator.shape[0],):
        raise DimensionError(
            f"target must have length {operator.shape[0]}, got shape {target.shape}"
        )
    if not np.all(np.isfinite(target)):
        raise InputError("target contains non-finite values")

    cols = operator.shape[1]
    rhs = operator.rmatvec(target)
    if not np.any(rhs):
        return np.zeros(cols)

    normal = _normal_operator(operator, alpha)
    x0 = None if alpha == 0 or initial is None else np.asarray(initial, dtype=float)
    solution, info = cg(
        normal, rhs, x0=x0, rtol=control.rel_tol, atol=0.0, maxiter=control.max_iters
    )
    if info < 0:
        raise SolverError(f"conjugate gradient breakdown (info={info})")
    if info > 0:
        logger.warning(
            "Conjugate gradient did not reach rel_tol=%g in %d iterations", control.rel_tol, info
        )
    if alpha == 0 and _is_rank_deficient(normal, estimate_lipschitz(operator, control.power_iters)):
        message = "ridge system with alpha=0 is rank deficient; returning the minimum-norm solution"
        logger.warning(message)
        warnings.warn(message, IllConditionedWarning, stacklevel=2)
    return solution
