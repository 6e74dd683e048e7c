"""Domain types and matrix-free shift operators of the convolutive synergy model."""

from .models import CoefficientSet, ShiftPlan, SynergyBank, VelocityDataset
from .operators import (
    apply_shift,
    block_operator,
    coefficient_operator_adjoint_apply,
    coefficient_operator_apply,
    dictionary_adjoint_apply,
    dictionary_apply,
    group_null_threshold,
    reconstruct,
    reconstruct_task,
)

__all__ = [
    "CoefficientSet",
    "ShiftPlan",
    "SynergyBank",
    "VelocityDataset",
    "apply_shift",
    "block_operator",
    "coefficient_operator_adjoint_apply",
    "coefficient_operator_apply",
    "dictionary_adjoint_apply",
    "dictionary_apply",
    "group_null_threshold",
    "reconstruct",
    "reconstruct_task",
]
