"""Pydantic models for the solvers package."""

from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class SparseGroupPenalty(BaseModel):
    """Weights of the sparse group LASSO norm lambda1 * ||x||_2 + lambda2 * ||x||_1.

    lambda1 = 0 gives the plain LASSO, lambda2 = 0 the plain group LASSO.
    """

    model_config = ConfigDict(frozen=True)

    lambda1: float = Field(default=0.1, ge=0)
    lambda2: float = Field(default=0.1, ge=0)


class SolverControl(BaseModel):
    """Stopping and step-size settings of an iterative solver.

    Attributes:
        max_iters: Iteration cap.
        rel_tol: Relative objective change (proximal gradient) or relative
            residual (conjugate gradient) below which the solver stops.
        step_rule: 'fixed' uses 1/L with L from a power-method estimate and
            falls back to backtracking when the estimate proves too small;
            'backtracking' backtracks from the first iteration.
        accelerated: Use the monotone accelerated variant of proximal gradient.
        power_iters: Power-method iterations for the Lipschitz estimate.
    """

    model_config = ConfigDict(frozen=True)

    max_iters: int = Field(default=5000, ge=1)
    rel_tol: float = Field(default=1e-6, gt=0)
    step_rule: Literal["fixed", "backtracking"] = "fixed"
    accelerated: bool = True
    power_iters: int = Field(default=20, ge=1)


class SolverResult(BaseModel):
    """Outcome of a proximal-gradient solve.

    Attributes:
        coeffs: Approximate minimizer.
        objective: Objective value at coeffs.
        iterations: Number of iterations performed.
        converged: Whether the relative-change criterion was met.
        trace: Objective of the accepted iterate after every iteration.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    coeffs: np.ndarray
    objective: float
    iterations: int
    converged: bool
    trace: list[float] = []
