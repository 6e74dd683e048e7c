"""Reading and writing datasets in the long CSV layout.

A dataset file looks like::

    kind,n,T,G,sample_rate
    velocities,2,3,1,100.0
    task_id,joint_id,t,value
    1,1,1,0.25
    1,2,1,-0.5
    ...

The first two lines declare the content kind (``angles`` or ``velocities``),
the joint count, the trajectory length, the task count and the sampling
rate. Every following row holds one sample with 1-based task, joint and
time indices. Files are UTF-8 with LF line endings; values are written with
the shortest representation that reads back to the same float.
"""

import csv
import logging
import math
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from src.exceptions import DatasetParseError
from src.model import VelocityDataset

from .models import AngleTrajectory

logger = logging.getLogger(__name__)

Kind = Literal["angles", "velocities"]

HEADER = ["kind", "n", "T", "G", "sample_rate"]
COLUMNS = ["task_id", "joint_id", "t", "value"]


def _parse_int(cell: str, row: int, column: int, name: str) -> int:
    try:
        return int(cell)
    except ValueError:
        raise DatasetParseError(f"{name} must be an integer, got {cell!r}", row, column)


def _parse_float(cell: str, row: int, column: int, name: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise DatasetParseError(f"{name} must be a number, got {cell!r}", row, column)
    if not math.isfinite(value):
        raise DatasetParseError(f"{name} must be finite, got {cell!r}", row, column)
    return value


def load_csv(
    path: Path | str, kind: Kind | None = None
) -> VelocityDataset | list[AngleTrajectory]:
    """Load a dataset file.

    Args:
        path: Path to the CSV file.
        kind: Expected content kind; None accepts either.

    Raises:
        DatasetParseError: Raised for a malformed header, ragged rows,
            non-numeric cells, out-of-range indices, duplicated or missing
            samples, or an unexpected kind; the message names the row and
            column.

    Returns:
        A VelocityDataset for velocity files, one AngleTrajectory per task
        for angle files.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))

    if len(rows) < 3 or rows[0] != HEADER:
        raise DatasetParseError(f"first line must be {','.join(HEADER)}", 1)
    if len(rows[1]) != len(HEADER):
        raise DatasetParseError(f"declaration line must have {len(HEADER)} fields", 2)
    declared_kind = rows[1][0]
    if declared_kind not in ("angles", "velocities"):
        raise DatasetParseError(f"unknown kind {declared_kind!r}", 2, 1)
    if kind is not None and declared_kind != kind:
        raise DatasetParseError(f"expected a {kind} file, found {declared_kind}", 2, 1)
    n = _parse_int(rows[1][1], 2, 2, "n")
    T = _parse_int(rows[1][2], 2, 3, "T")
    G = _parse_int(rows[1][3], 2, 4, "G")
    sample_rate = _parse_float(rows[1][4], 2, 5, "sample_rate")
    if n < 1 or T < 1 or G < 0 or sample_rate <= 0:
        raise DatasetParseError("n and T must be positive, G non-negative, sample_rate positive", 2)
    if rows[2] != COLUMNS:
        raise DatasetParseError(f"third line must be {','.join(COLUMNS)}", 3)

    values = np.full((G, T, n), np.nan)
    for line_number, row in enumerate(rows[3:], start=4):
        if not row:
            continue
        if len(row) != len(COLUMNS):
            raise DatasetParseError(
                f"expected {len(COLUMNS)} fields, found {len(row)}", line_number
            )
        task = _parse_int(row[0], line_number, 1, "task_id")
        joint = _parse_int(row[1], line_number, 2, "joint_id")
        t = _parse_int(row[2], line_number, 3, "t")
        value = _parse_float(row[3], line_number, 4, "value")
        for column, (index, bound, name) in enumerate(
            ((task, G, "task_id"), (joint, n, "joint_id"), (t, T, "t")), start=1
        ):
            if not 1 <= index <= bound:
                raise DatasetParseError(f"{name} {index} outside 1..{bound}", line_number, column)
        if not np.isnan(values[task - 1, t - 1, joint - 1]):
            raise DatasetParseError("duplicated sample", line_number)
        values[task - 1, t - 1, joint - 1] = value

    missing = np.argwhere(np.isnan(values))
    if missing.size:
        task, t, joint = missing[0] + 1
        raise DatasetParseError(
            f"{len(missing)} samples missing, first at task {task}, joint {joint}, t {t}"
        )
    logger.info("Loaded %s file %s: n=%d T=%d G=%d", declared_kind, path, n, T, G)

    if declared_kind == "velocities":
        return VelocityDataset(
            n=n, T=T, velocities=values.reshape(G, T * n), sample_rate=sample_rate
        )
    return [AngleTrajectory(angles=task.T, sample_rate=sample_rate) for task in values]


def save_csv(data: VelocityDataset | Sequence[AngleTrajectory], path: Path | str) -> None:
    """Write a velocity dataset or a list of angle trajectories in the CSV layout.

    Tasks are numbered 1..G in the order given.

    Args:
        data: Dataset or trajectories (sharing n, T and sample_rate).
        path: Destination, parent directories are created.
    """
    path = Path(path)
    if isinstance(data, VelocityDataset):
        kind, n, T, rate = "velocities", data.n, data.T, data.sample_rate
        tasks = data.velocities.reshape(data.G, data.T, data.n)
    else:
        if not data:
            raise ValueError("at least one trajectory is required")
        kind, n, T, rate = "angles", data[0].n, data[0].T, data[0].sample_rate
        tasks = np.stack([trajectory.angles.T for trajectory in data])

    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(HEADER)
        writer.writerow([kind, n, T, len(tasks), repr(float(rate))])
        writer.writerow(COLUMNS)
        for g, samples in enumerate(tasks, start=1):
            for t, sample in enumerate(samples, start=1):
                for i, value in enumerate(sample, start=1):
                    writer.writerow([g, i, t, repr(float(value))])
    logger.info("Wrote %s file %s", kind, path)
