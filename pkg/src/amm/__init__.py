"""Alternating minimization of the joint synergy / coefficient objective."""

from .engine import (
    c_step,
    fit_term,
    initialize,
    make_plan,
    normalize_rescale,
    objective,
    prune_inactive,
    run,
    s_step,
)
from .grid import grid_search, split_tasks
from .models import (
    AmmConfig,
    AmmState,
    GridConfig,
    GridPoint,
    GridSelection,
    ProgressRecord,
    TrainedBank,
)

__all__ = [
    "AmmConfig",
    "AmmState",
    "GridConfig",
    "GridPoint",
    "GridSelection",
    "ProgressRecord",
    "TrainedBank",
    "c_step",
    "fit_term",
    "grid_search",
    "initialize",
    "make_plan",
    "normalize_rescale",
    "objective",
    "prune_inactive",
    "run",
    "s_step",
    "split_tasks",
]
