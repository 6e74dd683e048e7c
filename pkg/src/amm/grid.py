"""Hyper-parameter selection over (lambda1, lambda2, alpha) on a validation split."""

import itertools
import logging
import math

import numpy as np

from src.exceptions import ConfigurationError
from src.model import ShiftPlan, VelocityDataset
from src.recon import ReconParams, evaluate_suite
from src.solvers import SparseGroupPenalty

from .engine import ProgressSink, run
from .models import AmmConfig, AmmState, GridConfig, GridPoint, GridSelection

logger = logging.getLogger(__name__)


def split_tasks(
    data: VelocityDataset, validation_fraction: float
) -> tuple[VelocityDataset, VelocityDataset]:
    """Split a dataset into training and validation tasks.

    The last ceil(validation_fraction * G) tasks are held out, so the split
    does not depend on any random state.

    Raises:
        ConfigurationError: Raised when either side of the split would be empty.

    Returns:
        The (training, validation) pair.
    """
    held_out = math.ceil(validation_fraction * data.G)
    if held_out < 1 or held_out >= data.G:
        raise ConfigurationError(
            f"cannot hold out {validation_fraction:.0%} of {data.G} tasks: "
            "both the training and the validation split need at least one task"
        )
    cut = data.G - held_out
    return data.select(list(range(cut))), data.select(list(range(cut, data.G)))


def _select(points: list[GridPoint], slack: float, ceiling: float | None = None) -> int:
    scores = [np.inf if p.validation_error is None else p.validation_error for p in points]
    best = min(scores)
    if not math.isfinite(best):
        return points[0].index
    if ceiling is not None:
        within = [p for p, s in zip(points, scores) if s <= ceiling]
        if within:
            return min(within, key=lambda p: (p.m_active, p.validation_error, p.index)).index
        logger.warning(
            "No grid point reaches validation error %g (best %g); using the slack rule",
            ceiling, best,
        )
    admissible = [p for p, s in zip(points, scores) if s <= best * (1.0 + slack)]
    return min(admissible, key=lambda p: (p.m_active, p.validation_error, p.index)).index


def grid_search(
    config: AmmConfig,
    data: VelocityDataset,
    grid: GridConfig,
    recon: ReconParams,
    plan: ShiftPlan | None = None,
    progress: ProgressSink | None = None,
) -> tuple[GridSelection, list[AmmState]]:
    """Train one bank per grid point and pick the best on held-out tasks.

    Every point runs the alternating minimization on the training split with
    its own (lambda1, lambda2, alpha) and everything else taken from config,
    then scores the bank by the mean normalized reconstruction error of the
    validation tasks. With grid.max_validation_error set, the sparsest point
    under that ceiling wins. Otherwise, or when no point meets it, the point
    with the smallest error wins and points within grid.selection_slack of it
    are preferred when they keep fewer synergies.

    Args:
        config: Base AMM configuration.
        data: Full training dataset, split by grid.validation_fraction.
        grid: Candidate values and selection settings.
        recon: Testing-phase parameters used for scoring.
        plan: Shift plan of the training window.
        progress: Sink forwarded to every run.

    Raises:
        ConfigurationError: Raised when the dataset cannot be split.

    Returns:
        The selection summary and the final state of every grid point, in
        grid order (lambda1 slowest, alpha fastest).
    """
    train, validation = split_tasks(data, grid.validation_fraction)
    validation_plan = None if plan is None else plan.with_window(validation.T)
    points: list[GridPoint] = []
    states: list[AmmState] = []
    combos = itertools.product(grid.lambda1, grid.lambda2, grid.alpha)
    for index, (lambda1, lambda2, alpha) in enumerate(combos):
        point_config = config.model_copy(
            update={
                "penalty": SparseGroupPenalty(lambda1=lambda1, lambda2=lambda2),
                "alpha": alpha,
            }
        )
        state = run(point_config, train, plan, progress)
        report = evaluate_suite(
            state.bank,
            validation,
            recon.lambda_test,
            recon.tau,
            recon.filter,
            recon.control,
            plan=validation_plan,
            threads=config.threads,
        )
        points.append(
            GridPoint(
                index=index,
                lambda1=lambda1,
                lambda2=lambda2,
                alpha=alpha,
                validation_error=report.summary.mean,
                m_active=state.m_final,
                final_objective=state.objective_trace[-1] if state.objective_trace else 0.0,
            )
        )
        states.append(state)
        logger.info(
            "Grid point %d (lambda1=%g, lambda2=%g, alpha=%g): validation error %s, m=%d",
            index, lambda1, lambda2, alpha, report.summary.mean, state.m_final,
        )
    selected = _select(points, grid.selection_slack, grid.max_validation_error)
    logger.info("Selected grid point %d", selected)
    return GridSelection(points=points, selected=selected), states
