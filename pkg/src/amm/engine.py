"""Alternating minimization over synergy templates and activation coefficients.

Every outer iteration runs a C-step (one sparse group LASSO per task, tasks
solved independently), an S-step (one ridge regression per synergy, in
ascending index order, each against the freshest residuals), then
normalizes the templates to unit norm, rescales the coefficients and prunes
synergies whose coefficients vanished on every task.
"""

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np
from scipy.sparse.linalg import LinearOperator

from src.exceptions import ConfigurationError, DivergenceError, StepError, SynergyError
from src.model import (
    CoefficientSet,
    ShiftPlan,
    SynergyBank,
    VelocityDataset,
    block_operator,
    coefficient_operator_adjoint_apply,
    coefficient_operator_apply,
    dictionary_apply,
    reconstruct,
)
from src.solvers import estimate_lipschitz, ridge_solve, sparse_group_lasso_solve

from .models import AmmConfig, AmmState, ProgressRecord

logger = logging.getLogger(__name__)

ProgressSink = Callable[[ProgressRecord], None]


def make_plan(config: AmmConfig, T: int) -> ShiftPlan:
    """Uniform shift plan of the configured synergies for a window of length T.

    Raises:
        ConfigurationError: Raised when T_s exceeds T.
    """
    if config.T_s > T:
        raise ConfigurationError(f"synergy length T_s={config.T_s} exceeds trajectory length T={T}")
    return ShiftPlan.uniform(T, config.T_s, config.m_int, stride=config.stride)


def _worker_count(config: AmmConfig) -> int:
    return config.threads or os.cpu_count() or 1


def _group_weights(config: AmmConfig, sizes: list[int]) -> np.ndarray | None:
    return np.sqrt(sizes) if config.weight_by_group_size else None


def _block_indices(plan: ShiftPlan, synergies: list[int]) -> np.ndarray:
    offsets = plan.offsets
    return np.concatenate(
        [np.arange(offsets[j], offsets[j + 1]) for j in synergies] or [np.zeros(0, dtype=int)]
    )


def initialize(config: AmmConfig, data: VelocityDataset, plan: ShiftPlan) -> AmmState:
    """Draw m_int random unit-norm templates and zero coefficients.

    Args:
        config: AMM configuration (m_int, T_s, seed).
        data: Training data, providing n, T and G.
        plan: Shift plan with m_int synergies.

    Raises:
        ConfigurationError: Raised when T_s > T or the plan does not match.

    Returns:
        The initial state, deterministic given config.seed.
    """
    if config.T_s > data.T:
        raise ConfigurationError(
            f"synergy length T_s={config.T_s} exceeds trajectory length T={data.T}"
        )
    if plan.T != data.T or plan.T_s != config.T_s or plan.m != config.m_int:
        raise ConfigurationError(
            f"shift plan (T={plan.T}, T_s={plan.T_s}, m={plan.m}) does not match data "
            f"T={data.T} and config T_s={config.T_s}, m_int={config.m_int}"
        )
    rng = np.random.default_rng(config.seed)
    templates = rng.standard_normal((config.m_int, data.n * config.T_s))
    templates /= np.linalg.norm(templates, axis=1, keepdims=True)
    bank = SynergyBank(n=data.n, T_s=config.T_s, templates=templates)
    return AmmState(
        bank=bank,
        coeffs=CoefficientSet.zeros(data.G, plan),
        dormant_streak=(0,) * config.m_int,
    )


def c_step(
    state: AmmState, data: VelocityDataset, plan: ShiftPlan, config: AmmConfig
) -> CoefficientSet:
    """Update the coefficients of every task with the templates held fixed.

    Each task solves its own sparse group LASSO against the block dictionary
    of the active synergies, one group per synergy. Tasks run on a thread
    pool; results are merged by task index.

    Raises:
        StepError: Raised when the solve of a task fails; names the task.

    Returns:
        The new coefficient set (zero for inactive synergies).
    """
    active = state.bank.active_indices
    values = np.zeros_like(state.coeffs.values)
    if not active or data.G == 0:
        return CoefficientSet(sizes=plan.sizes, values=values)

    operator = block_operator(state.bank, plan, active)
    columns = _block_indices(plan, active)
    sizes = [plan.K(j) for j in active]
    weights = _group_weights(config, sizes)
    lipschitz = estimate_lipschitz(operator, config.c_control.power_iters)

    def solve(g: int) -> np.ndarray:
        initial = state.coeffs.values[g, columns] if config.warm_start else None
        try:
            result = sparse_group_lasso_solve(
                operator,
                sizes,
                data.task(g),
                config.penalty,
                control=config.c_control,
                initial=initial,
                lipschitz=lipschitz,
                group_weights=weights,
            )
        except SynergyError as error:
            raise StepError("c_step", g, str(error)) from error
        return result.coeffs

    workers = min(_worker_count(config), data.G)
    if workers == 1:
        solutions = [solve(g) for g in range(data.G)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            solutions = list(pool.map(solve, range(data.G)))
    values[:, columns] = np.stack(solutions)
    return CoefficientSet(sizes=plan.sizes, values=values)


def _stacked_coefficient_operator(
    task_coeffs: np.ndarray, n: int, plan: ShiftPlan, synergy: int
) -> LinearOperator:
    """B_j stacked over tasks: x -> [B_j(c^1) x; ...; B_j(c^G) x]."""
    rows = n * plan.T
    tasks = task_coeffs.shape[0]

    def matvec(x: np.ndarray) -> np.ndarray:
        x = np.ravel(x)
        return np.concatenate(
            [coefficient_operator_apply(c, x, plan, synergy=synergy) for c in task_coeffs]
        )

    def rmatvec(r: np.ndarray) -> np.ndarray:
        segments = np.ravel(r).reshape(tasks, rows)
        return sum(
            coefficient_operator_adjoint_apply(c, segment, n, plan, synergy=synergy)
            for c, segment in zip(task_coeffs, segments)
        )

    return LinearOperator(
        shape=(tasks * rows, n * plan.T_s), matvec=matvec, rmatvec=rmatvec, dtype=float
    )


def s_step(
    state: AmmState, data: VelocityDataset, plan: ShiftPlan, config: AmmConfig
) -> SynergyBank:
    """Update the templates one synergy at a time with the coefficients held fixed.

    For synergy j the target is the residual r_{-j} of every task whose
    coefficients c_j^g are nonzero, computed with the templates already
    updated in this sweep; the new template solves the ridge regression
    against the stacked operator B_j. Synergies without any nonzero
    coefficient keep their template.

    Raises:
        StepError: Raised when a ridge solve fails; names the synergy.

    Returns:
        The updated bank, not yet normalized.
    """
    bank = state.bank
    coeffs = state.coeffs
    templates = bank.templates.copy()
    fitted = reconstruct(bank, coeffs, plan)

    for j in bank.active_indices:
        synergy_coeffs = coeffs.synergy_values(j)
        tasks = np.flatnonzero(np.any(synergy_coeffs != 0.0, axis=1))
        if tasks.size == 0:
            continue
        task_coeffs = synergy_coeffs[tasks]
        own = np.stack([dictionary_apply(templates[j], c, plan, synergy=j) for c in task_coeffs])
        residual = data.velocities[tasks] - fitted[tasks] + own
        operator = _stacked_coefficient_operator(task_coeffs, bank.n, plan, j)
        try:
            updated = ridge_solve(
                operator, residual.ravel(), config.alpha, config.s_control, initial=templates[j]
            )
        except SynergyError as error:
            raise StepError("s_step", j, str(error)) from error
        new_own = np.stack([dictionary_apply(updated, c, plan, synergy=j) for c in task_coeffs])
        fitted[tasks] += new_own - own
        templates[j] = updated
        logger.debug("S-step updated synergy %d from %d tasks", j, tasks.size)

    return bank.replace(templates=templates)


def normalize_rescale(state: AmmState) -> AmmState:
    """Scale every template to unit norm and its coefficients by the old norm.

    The products D(s^j) c_j^g, hence every reconstruction, are unchanged.
    Zero templates are left as they are and flagged inactive.
    """
    bank = state.bank
    norms = bank.norms()
    templates = bank.templates.copy()
    values = state.coeffs.values.copy()
    offsets = state.coeffs.offsets
    flags = list(bank.active_flags)
    for j, norm in enumerate(norms):
        if norm > 0.0:
            templates[j] /= norm
            values[:, offsets[j] : offsets[j + 1]] *= norm
        else:
            flags[j] = False
    return state.model_copy(
        update={
            "bank": bank.replace(templates=templates, active_flags=tuple(flags)),
            "coeffs": CoefficientSet(sizes=state.coeffs.sizes, values=values),
        }
    )


def prune_inactive(
    state: AmmState, prune_eps: float, patience: int = 1, relative: bool = False
) -> AmmState:
    """Deactivate synergies whose coefficients vanish on every task.

    A synergy is dormant when max_g ||c_j^g||_2 is zero or below the
    threshold (prune_eps, times the largest group norm when relative). It is
    flagged inactive, and its coefficients set to zero, once it has been
    dormant for `patience` consecutive calls.

    Args:
        state: Current state.
        prune_eps: Threshold on the coefficient group norms.
        patience: Consecutive dormant calls required before deactivation.
        relative: Scale prune_eps by the largest group norm of the state.

    Returns:
        The state with updated active flags, dormancy counters and coefficients.
    """
    coeffs = state.coeffs
    norms = coeffs.group_norms()
    peak = norms.max(axis=0) if coeffs.G else np.zeros(coeffs.m)
    threshold = prune_eps * float(peak.max(initial=0.0)) if relative else prune_eps
    dormant = (peak == 0.0) | (peak < threshold)

    previous = state.dormant_streak or (0,) * coeffs.m
    streak = tuple(count + 1 if d else 0 for count, d in zip(previous, dormant))
    flags = tuple(
        flag and count < patience for flag, count in zip(state.bank.active_flags, streak)
    )
    values = coeffs.values.copy()
    offsets = coeffs.offsets
    for j, flag in enumerate(flags):
        if not flag:
            values[:, offsets[j] : offsets[j + 1]] = 0.0
    removed = [
        j for j, (old, new) in enumerate(zip(state.bank.active_flags, flags)) if old and not new
    ]
    if removed:
        logger.info("Pruned inactive synergies %s", removed)
    return state.model_copy(
        update={
            "bank": state.bank.replace(active_flags=flags),
            "coeffs": CoefficientSet(sizes=coeffs.sizes, values=values),
            "dormant_streak": streak,
        }
    )


def fit_term(state: AmmState, data: VelocityDataset, plan: ShiftPlan) -> float:
    """Squared-loss part of the objective, 1/2 Sum_g ||v^g - reconstruction||^2."""
    residual = data.velocities - reconstruct(state.bank, state.coeffs, plan)
    return 0.5 * float(np.sum(residual**2))


def objective(state: AmmState, data: VelocityDataset, plan: ShiftPlan, config: AmmConfig) -> float:
    """Joint objective of the synergy extraction problem.

    Sum over tasks of the squared loss, the sparse group penalty of every
    active synergy and the smoothing term lambda * Sum_j ||s^j||^2, with
    lambda = alpha / 2G, so the smoothing contributes alpha/2 Sum_j ||s^j||^2
    in total (the weight the S-step ridge regression uses).
    """
    bank = state.bank
    active = bank.active_indices
    value = fit_term(state, data, plan)
    if not active:
        return value
    norms = state.coeffs.group_norms()[:, active]
    sizes = [plan.K(j) for j in active]
    weights = _group_weights(config, sizes)
    group_part = norms.sum(axis=0) if weights is None else norms.sum(axis=0) * weights
    columns = _block_indices(plan, active)
    value += config.penalty.lambda1 * float(group_part.sum())
    value += config.penalty.lambda2 * float(np.abs(state.coeffs.values[:, columns]).sum())
    if data.G:
        smoothing = float(np.sum(bank.templates[active] ** 2))
        value += data.G * config.smoothing_weight(data.G) * smoothing
    return value


def run(
    config: AmmConfig,
    data: VelocityDataset,
    plan: ShiftPlan | None = None,
    progress: ProgressSink | None = None,
) -> AmmState:
    """Run the alternating minimization to convergence.

    Loops C-step, S-step, normalization, pruning and objective recording
    until the relative objective change drops below config.outer_rel_tol or
    config.max_outer_iters is reached. Synergies still dormant at the end
    are then deactivated.

    Args:
        config: AMM configuration.
        data: Training data.
        plan: Shift plan, defaults to the uniform plan of the configuration.
        progress: Optional sink receiving a ProgressRecord per iteration.

    Raises:
        StepError: Propagated from the C-step or S-step.
        DivergenceError: Raised when the objective becomes non-finite.

    Returns:
        The final state, including the full objective trace.
    """
    plan = plan or make_plan(config, data.T)
    state = initialize(config, data, plan)
    previous = objective(state, data, plan, config)
    trace: list[float] = []
    steps: list[tuple[float, float, float]] = []
    normalized = True
    logger.info(
        "AMM start: G=%d n=%d T=%d m_int=%d T_s=%d objective=%.6g",
        data.G, data.n, data.T, config.m_int, config.T_s, previous,
    )

    for iteration in range(1, config.max_outer_iters + 1):
        start = objective(state, data, plan, config)
        state = state.model_copy(update={"coeffs": c_step(state, data, plan, config)})
        after_c = objective(state, data, plan, config)
        state = state.model_copy(update={"bank": s_step(state, data, plan, config)})
        after_s = objective(state, data, plan, config)

        normalized = iteration % config.normalize_every == 0
        if normalized:
            state = normalize_rescale(state)
        state = prune_inactive(
            state, config.prune_eps, config.prune_patience, config.prune_relative
        )
        current = objective(state, data, plan, config)
        trace.append(current)
        steps.append((start, after_c, after_s))
        if not all(math.isfinite(v) for v in (after_c, after_s, current)):
            raise DivergenceError(f"objective became non-finite at iteration {iteration}", trace)

        state = state.model_copy(
            update={
                "objective_trace": list(trace),
                "step_objectives": list(steps),
                "iteration": iteration,
            }
        )
        logger.info(
            "AMM iteration %d: objective=%.8g active=%d", iteration, current, state.bank.m_active
        )
        if progress is not None:
            progress(
                ProgressRecord(
                    iteration=iteration, objective=current, active_count=state.bank.m_active
                )
            )
        scale = max(abs(previous), np.finfo(float).tiny)
        if abs(previous - current) <= config.outer_rel_tol * scale:
            state = state.model_copy(update={"converged": True})
            break
        previous = current

    if not normalized:
        state = normalize_rescale(state)
    state = prune_inactive(state, config.prune_eps, patience=1, relative=config.prune_relative)
    logger.info(
        "AMM finished after %d iterations (converged=%s): m_final=%d",
        state.iteration, state.converged, state.m_final,
    )
    return state
