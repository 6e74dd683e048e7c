"""Convex subproblem solvers: sparse group LASSO, LASSO and ridge regression."""

from .models import SolverControl, SolverResult, SparseGroupPenalty
from .prox import prox_group, prox_soft_threshold, prox_sparse_group
from .ridge import ridge_solve
from .sparse_group_lasso import (
    check_sgl_optimality,
    estimate_lipschitz,
    lasso_null_threshold,
    lasso_solve,
    sgl_objective,
    sparse_group_lasso_solve,
)

__all__ = [
    "SolverControl",
    "SolverResult",
    "SparseGroupPenalty",
    "check_sgl_optimality",
    "estimate_lipschitz",
    "lasso_null_threshold",
    "lasso_solve",
    "prox_group",
    "prox_soft_threshold",
    "prox_sparse_group",
    "ridge_solve",
    "sgl_objective",
    "sparse_group_lasso_solve",
]
