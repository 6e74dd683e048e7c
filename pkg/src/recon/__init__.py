"""Testing-phase reconstruction of unseen movements from a trained synergy bank."""

from .bank import build_bank, prune_correlated, smooth_bank
from .evaluation import (
    coefficient_null_threshold,
    evaluate_suite,
    normalized_error,
    reconstruct_gesture,
    select_lambda_test,
)
from .models import (
    EvaluationReport,
    FilterParams,
    GestureReconstruction,
    ReconParams,
    ReportSummary,
    SynergyBankMatrix,
    TaskRecord,
)

__all__ = [
    "EvaluationReport",
    "FilterParams",
    "GestureReconstruction",
    "ReconParams",
    "ReportSummary",
    "SynergyBankMatrix",
    "TaskRecord",
    "build_bank",
    "coefficient_null_threshold",
    "evaluate_suite",
    "normalized_error",
    "prune_correlated",
    "reconstruct_gesture",
    "select_lambda_test",
    "smooth_bank",
]
