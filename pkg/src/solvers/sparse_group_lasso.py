"""Proximal-gradient solver for least squares with a sparse group LASSO penalty.

Minimizes

    1/2 ||target - A c||_2^2 + Sum_groups (lambda1 * w_g * ||c_g||_2 + lambda2 * ||c_g||_1)

over c, where the groups are contiguous blocks of c. The operator A is any
scipy LinearOperator (matvec = A c, rmatvec = A^T r), so the dictionary
never has to be materialized.
"""

import logging
import math
from typing import Sequence

import numpy as np
from scipy.sparse.linalg import LinearOperator

from src.exceptions import DimensionError, InputError, SolverError

from .models import SolverControl, SolverResult, SparseGroupPenalty
from .prox import group_norms, prox_soft_threshold, prox_sparse_group

logger = logging.getLogger(__name__)

_MIN_STEP = 1e-30


def _penalty_value(
    x: np.ndarray, sizes: Sequence[int], tau1: np.ndarray, lambda2: float
) -> float:
    value = lambda2 * float(np.abs(x).sum())
    if np.any(tau1):
        value += float(np.dot(tau1, group_norms(x, sizes)))
    return value


def _group_weights(sizes: Sequence[int], group_weights: Sequence[float] | None) -> np.ndarray:
    if group_weights is None:
        return np.ones(len(sizes))
    weights = np.asarray(group_weights, dtype=float)
    if weights.shape != (len(sizes),) or np.any(weights < 0):
        raise DimensionError("one non-negative weight per group is required")
    return weights


def sgl_objective(
    operator: LinearOperator,
    coeffs: np.ndarray,
    groups: Sequence[int],
    target: np.ndarray,
    penalty: SparseGroupPenalty,
    group_weights: Sequence[float] | None = None,
) -> float:
    """Value of the sparse group LASSO objective at coeffs."""
    residual = operator.matvec(coeffs) - target
    tau1 = penalty.lambda1 * _group_weights(groups, group_weights)
    return 0.5 * float(residual @ residual) + _penalty_value(coeffs, groups, tau1, penalty.lambda2)


def estimate_lipschitz(operator: LinearOperator, iters: int = 20, seed: int = 0) -> float:
    """Estimate the largest eigenvalue of A^T A by power iteration.

    Args:
        operator: Linear operator A.
        iters: Number of power iterations.
        seed: Seed of the random starting vector.

    Returns:
        The estimate (a lower bound of the true value).
    """
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(operator.shape[1])
    x /= np.linalg.norm(x)
    estimate = 0.0
    for _ in range(iters):
        y = operator.rmatvec(operator.matvec(x))
        estimate = float(np.linalg.norm(y))
        if estimate == 0.0 or not math.isfinite(estimate):
            break
        x = y / estimate
    return estimate


def sparse_group_lasso_solve(
    operator: LinearOperator,
    groups: Sequence[int],
    target: np.ndarray,
    penalty: SparseGroupPenalty,
    control: SolverControl | None = None,
    initial: np.ndarray | None = None,
    lipschitz: float | None = None,
    group_weights: Sequence[float] | None = None,
) -> SolverResult:
    """Solve the sparse group LASSO problem by (monotone accelerated) proximal gradient.

    Each iteration takes a gradient step on the squared loss and applies the
    exact prox of the penalty, soft-thresholding followed by group shrinkage.
    With the default 'fixed' rule the step is 1/L, L estimated by power
    iteration; if the quadratic upper bound fails for that step the solver
    switches to backtracking. The accepted iterate never increases the
    objective.

    Args:
        operator: Linear operator A mapping coefficients to target space.
        groups: Sizes of the contiguous coefficient groups (one per synergy).
        target: Observation vector.
        penalty: Sparse group penalty weights.
        control: Stopping and step settings.
        initial: Warm start, defaults to zeros.
        lipschitz: Precomputed Lipschitz constant of the gradient.
        group_weights: Optional multiplier of lambda1 per group.

    Raises:
        InputError: Raised when the target contains non-finite values.
        DimensionError: Raised when groups, target or initial do not match A.
        SolverError: Raised when no usable step size can be found.

    Returns:
        SolverResult with the coefficients, the final objective and the
        per-iteration objective trace.
    """
    control = control or SolverControl()
    target = np.asarray(target, dtype=float)
    if not np.all(np.isfinite(target)):
        raise InputError("target contains non-finite values")
    rows, cols = operator.shape
    sizes = [int(s) for s in groups]
    if target.shape != (rows,):
        raise DimensionError(f"target must have length {rows}, got shape {target.shape}")
    if sum(sizes) != cols or any(s < 1 for s in sizes):
        raise DimensionError(f"groups {sizes} do not partition {cols} coefficients")
    tau1 = penalty.lambda1 * _group_weights(sizes, group_weights)
    lambda2 = penalty.lambda2

    x = np.zeros(cols) if initial is None else np.array(initial, dtype=float)
    if x.shape != (cols,):
        raise DimensionError(f"initial point must have length {cols}")

    backtracking = control.step_rule == "backtracking"
    estimate = lipschitz if lipschitz is not None else estimate_lipschitz(
        operator, control.power_iters
    )
    if not math.isfinite(estimate) or estimate <= 0.0:
        if not backtracking:
            raise SolverError(
                f"step size estimation failed: power-method Lipschitz estimate is {estimate} "
                f"for an operator of shape {operator.shape}"
            )
        estimate = 1.0
    step = 1.0 / estimate

    Ax = operator.matvec(x)
    F = 0.5 * float((Ax - target) @ (Ax - target)) + _penalty_value(x, sizes, tau1, lambda2)
    y, Ay = x, Ax
    t = 1.0
    trace: list[float] = []
    converged = False
    iteration = 0

    for iteration in range(1, control.max_iters + 1):
        residual_y = Ay - target
        fy = 0.5 * float(residual_y @ residual_y)
        grad = operator.rmatvec(residual_y)
        while True:
            z = prox_sparse_group(y - step * grad, sizes, step * tau1, step * lambda2)
            Az = operator.matvec(z)
            diff = z - y
            fz = 0.5 * float((Az - target) @ (Az - target))
            bound = fy + float(grad @ diff) + float(diff @ diff) / (2.0 * step)
            if fz <= bound + 1e-12 * max(1.0, abs(fy)):
                break
            if not backtracking:
                logger.debug("Step 1/L violates the quadratic bound, switching to backtracking")
                backtracking = True
            step *= 0.5
            if step < _MIN_STEP:
                raise SolverError(f"backtracking failed to find a step at iteration {iteration}")

        Fz = fz + _penalty_value(z, sizes, tau1, lambda2)
        if not math.isfinite(Fz):
            raise SolverError(f"objective became non-finite at iteration {iteration}")
        accepted = Fz <= F
        x_new, Ax_new, F_new = (z, Az, Fz) if accepted else (x, Ax, F)

        if control.accelerated:
            t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
            y = x_new + (t / t_new) * (z - x_new) + ((t - 1.0) / t_new) * (x_new - x)
            Ay = Ax_new + (t / t_new) * (Az - Ax_new) + ((t - 1.0) / t_new) * (Ax_new - Ax)
            t = t_new
        else:
            y, Ay = x_new, Ax_new

        change = abs(F - F_new)
        scale = max(abs(F), np.finfo(float).tiny)
        x, Ax, F = x_new, Ax_new, F_new
        trace.append(F)
        if accepted and change <= control.rel_tol * scale:
            converged = True
            break

    if not converged:
        logger.debug(
            "Sparse group LASSO stopped at max_iters=%d (objective %.6g)", control.max_iters, F
        )
    return SolverResult(
        coeffs=x, objective=F, iterations=iteration, converged=converged, trace=trace
    )


def check_sgl_optimality(
    coeffs: np.ndarray,
    operator: LinearOperator,
    groups: Sequence[int],
    target: np.ndarray,
    penalty: SparseGroupPenalty,
    group_weights: Sequence[float] | None = None,
) -> float:
    """Largest violation of the optimality (KKT) conditions of the sparse group LASSO.

    For a zero group the condition is ||S(g_group, lambda2)||_2 <= lambda1,
    S being soft-thresholding. For a nonzero group the gradient plus a
    subgradient of the penalty must vanish; the subgradient uses sign(c_i)
    at nonzero entries and the best element of [-lambda2, lambda2] at zero
    entries.

    Returns:
        The maximum violation over groups (0 at an exact minimizer).
    """
    coeffs = np.asarray(coeffs, dtype=float)
    gradient = operator.rmatvec(operator.matvec(coeffs) - np.asarray(target, dtype=float))
    weights = _group_weights(groups, group_weights)
    lambda2 = penalty.lambda2
    worst = 0.0
    start = 0
    for size, weight in zip(groups, weights):
        block = coeffs[start : start + size]
        grad_block = gradient[start : start + size]
        lambda1 = penalty.lambda1 * weight
        if not np.any(block):
            violation = max(
                0.0, float(np.linalg.norm(prox_soft_threshold(grad_block, lambda2))) - lambda1
            )
        else:
            subgradient = np.where(
                block != 0.0, lambda2 * np.sign(block), -np.clip(grad_block, -lambda2, lambda2)
            )
            stationarity = grad_block + lambda1 * block / np.linalg.norm(block) + subgradient
            violation = float(np.max(np.abs(stationarity)))
        worst = max(worst, violation)
        start += size
    return worst


def lasso_null_threshold(operator: LinearOperator, target: np.ndarray) -> float:
    """Smallest lambda for which the LASSO solution is zero: ||A^T target||_inf."""
    correlations = operator.rmatvec(np.asarray(target, dtype=float))
    return float(np.max(np.abs(correlations), initial=0.0))


def lasso_solve(
    operator: LinearOperator,
    target: np.ndarray,
    lambda_test: float,
    control: SolverControl | None = None,
    initial: np.ndarray | None = None,
) -> SolverResult:
    """Solve 1/2 ||target - A c||^2 + lambda_test ||c||_1.

    This is the sparse group solver with lambda1 = 0 and groups of size 1.

    Raises:
        InputError: Raised when lambda_test is negative or the target is not finite.
    """
    if lambda_test < 0:
        raise InputError(f"lambda_test must be non-negative, got {lambda_test}")
    return sparse_group_lasso_solve(
        operator,
        [1] * operator.shape[1],
        target,
        SparseGroupPenalty(lambda1=0.0, lambda2=lambda_test),
        control=control,
        initial=initial,
    )
