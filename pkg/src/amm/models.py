"""Pydantic models for the amm package."""

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.model import CoefficientSet, ShiftPlan, SynergyBank
from src.solvers import SolverControl, SparseGroupPenalty


class AmmConfig(BaseModel):
    """Tuning parameters of the alternating minimization.

    Attributes:
        m_int: Number of synergies initialized at random.
        T_s: Synergy template length (samples).
        stride: Spacing of the uniform shift grid.
        penalty: Sparse group LASSO weights (lambda1, lambda2) of the C-step.
        alpha: Ridge weight of the S-step; the smoothing weight of the joint
            objective is lambda = alpha / 2G.
        max_outer_iters: Cap on outer iterations.
        outer_rel_tol: Relative objective change that stops the outer loop.
        prune_eps: Threshold below which a synergy's coefficients count as zero.
        prune_relative: Interpret prune_eps relative to the largest group norm.
        prune_patience: Consecutive dormant iterations before a synergy is
            removed for good (a dormant synergy can still revive until then).
        normalize_every: Normalize templates every this many outer iterations.
        warm_start: Start each C-step solve from the previous coefficients.
        weight_by_group_size: Scale lambda1 by sqrt(K_j) per group.
        seed: Seed of the template initialization.
        threads: Worker threads for the per-task C-step solves (None: all cores).
        c_control: Solver settings of the C-step.
        s_control: Solver settings of the S-step.
    """

    m_int: int = Field(default=10, ge=1)
    T_s: int = Field(default=39, ge=1)
    stride: int = Field(default=1, ge=1)
    penalty: SparseGroupPenalty = SparseGroupPenalty()
    alpha: float = Field(default=1.0, ge=0)
    max_outer_iters: int = Field(default=200, ge=1)
    outer_rel_tol: float = Field(default=1e-5, gt=0)
    prune_eps: float = Field(default=1e-8, gt=0)
    prune_relative: bool = True
    prune_patience: int = Field(default=3, ge=1)
    normalize_every: int = Field(default=1, ge=1)
    warm_start: bool = True
    weight_by_group_size: bool = False
    seed: int = 0
    threads: int | None = Field(default=None, ge=1)
    c_control: SolverControl = SolverControl()
    s_control: SolverControl = SolverControl(max_iters=1000)

    def smoothing_weight(self, G: int) -> float:
        """lambda = alpha / 2G, the weight of R(s) inside every task term."""
        return self.alpha / (2 * G)


class AmmState(BaseModel):
    """Iterate of the alternating minimization.

    Attributes:
        bank: Current synergy bank.
        coeffs: Current coefficients.
        objective_trace: Objective after every completed outer iteration.
        step_objectives: Objective at the start, after the C-step and after
            the S-step of every outer iteration (before normalization).
        iteration: Number of completed outer iterations.
        dormant_streak: Consecutive iterations each synergy has been dormant.
        converged: Whether the outer stopping rule was met.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    bank: SynergyBank
    coeffs: CoefficientSet
    objective_trace: list[float] = []
    step_objectives: list[tuple[float, float, float]] = []
    iteration: int = 0
    dormant_streak: tuple[int, ...] = ()
    converged: bool = False

    @property
    def m_final(self) -> int:
        return self.bank.m_active


class ProgressRecord(BaseModel):
    """Progress report emitted after every outer iteration."""

    iteration: int
    objective: float
    active_count: int


class GridConfig(BaseModel):
    """Hyper-parameter grid over (lambda1, lambda2, alpha).

    Attributes:
        lambda1: Candidate group weights.
        lambda2: Candidate elementwise weights.
        alpha: Candidate ridge weights.
        validation_fraction: Share of training tasks held out for scoring.
        selection_slack: Grid points whose validation error is within this
            relative margin of the best compete on the number of active
            synergies (fewer wins).
        max_validation_error: Error ceiling. When set, the point with the
            fewest active synergies among those whose validation error does
            not exceed it is selected; the slack rule applies only when no
            point meets the ceiling.
    """

    lambda1: list[float] = [0.01, 0.1, 1.0]
    lambda2: list[float] = [0.01, 0.1, 1.0]
    alpha: list[float] = [0.1, 1.0, 10.0]
    validation_fraction: float = Field(default=0.2, gt=0, lt=1)
    selection_slack: float = Field(default=0.05, ge=0)
    max_validation_error: float | None = Field(default=None, gt=0)

    @field_validator("lambda1", "lambda2", "alpha")
    @classmethod
    def check_values(cls, values: list[float]) -> list[float]:
        if not values or any(v < 0 for v in values):
            raise ValueError("grid values must be a non-empty list of non-negative numbers")
        return values


class GridPoint(BaseModel):
    """Outcome of training at one grid point."""

    index: int
    lambda1: float
    lambda2: float
    alpha: float
    validation_error: float | None
    m_active: int
    final_objective: float


class GridSelection(BaseModel):
    """Summary of a grid search: every point and the selected one."""

    points: list[GridPoint]
    selected: int


class TrainedBank(BaseModel):
    """JSON document of a trained synergy bank.

    Attributes:
        n: Joint count.
        T: Training window length.
        T_s: Template length.
        sample_rate: Sampling rate of the training data, Hz.
        templates: Every template (active or not), joint-major.
        active_flags: Whether each template survived pruning.
        shifts: Training shift grid of every synergy.
        final_objective: Objective after the last outer iteration.
        iterations: Completed outer iterations.
        converged: Whether the outer stopping rule was met.
    """

    schema_version: int = 1
    n: int
    T: int
    T_s: int
    sample_rate: float = 1.0
    templates: list[list[float]]
    active_flags: list[bool]
    shifts: list[list[int]]
    final_objective: float
    iterations: int
    converged: bool

    @classmethod
    def from_state(cls, state: AmmState, plan: ShiftPlan, sample_rate: float) -> "TrainedBank":
        return cls(
            n=state.bank.n,
            T=plan.T,
            T_s=state.bank.T_s,
            sample_rate=sample_rate,
            templates=state.bank.templates.tolist(),
            active_flags=list(state.bank.active_flags),
            shifts=[list(s) for s in plan.shifts],
            final_objective=state.objective_trace[-1] if state.objective_trace else 0.0,
            iterations=state.iteration,
            converged=state.converged,
        )

    def to_bank(self) -> SynergyBank:
        return SynergyBank(
            n=self.n,
            T_s=self.T_s,
            templates=np.asarray(self.templates, dtype=float).reshape(-1, self.n * self.T_s),
            active_flags=tuple(self.active_flags),
        )

    def to_plan(self) -> ShiftPlan:
        return ShiftPlan(T=self.T, T_s=self.T_s, shifts=tuple(tuple(s) for s in self.shifts))
