"""Utilities for writing run artifacts to the output directory."""

import csv
import logging
from pathlib import Path
from typing import Sequence

from pydantic import BaseModel

from src.amm import AmmState, GridSelection, ProgressRecord, TrainedBank
from src.dataio import AngleTrajectory, save_csv
from src.model import CoefficientSet, ShiftPlan, VelocityDataset
from src.recon import EvaluationReport

logger = logging.getLogger(__name__)

COEFFICIENT_COLUMNS = ["task", "synergy", "shift", "value"]
TRACE_COLUMNS = ["iter", "objective", "active_count"]
SNAPSHOT_COLUMNS = ["synergy", "fraction", "joint", "angle"]


class FileStorageManager:
    """Utility class for interacting with the output directory of a run.

    Every artifact is written below file_storage_root_path unless an explicit
    path is given; parent directories are created on demand.
    """

    def __init__(self, file_storage_root_path: Path) -> None:
        self.file_storage_root_path = Path(file_storage_root_path)

    def _target(self, name: str | Path) -> Path:
        path = Path(self.file_storage_root_path, name)
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

    def _write_json(self, document: BaseModel, path: Path) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(document.model_dump_json(indent=2), encoding="utf-8")
        logger.info("Wrote %s", path)
        return path

    def _write_rows(self, rows: Sequence[Sequence[object]], path: Path) -> Path:
        with open(path, "w", newline="", encoding="utf-8") as f:
            csv.writer(f, lineterminator="\n").writerows(rows)
        logger.info("Wrote %s", path)
        return path

    def save_bank(self, document: TrainedBank, path: Path | None = None) -> Path:
        """Save a trained bank as JSON.

        Args:
            document: The bank document.
            path: Destination, defaults to bank.json in the output directory.

        Returns:
            Path to the saved file.
        """
        return self._write_json(document, Path(path) if path else self._target("bank.json"))

    @staticmethod
    def load_bank(path: Path) -> TrainedBank:
        """Read a trained bank written by save_bank.

        Raises:
            OSError: Raised when the file cannot be read.
            pydantic.ValidationError: Raised when the document is malformed.
        """
        return TrainedBank.model_validate_json(Path(path).read_text(encoding="utf-8"))

    def save_coefficients(
        self,
        coeffs: CoefficientSet,
        plan: ShiftPlan,
        task_ids: Sequence[int],
        name: str = "coefficients.csv",
    ) -> Path:
        """Save the nonzero coefficients as (task, synergy, shift, value) rows.

        Tasks are given by their dataset ids, synergies by their 0-based
        index in the bank and shifts in samples.
        """
        rows: list[list[object]] = [COEFFICIENT_COLUMNS]
        for g, task_id in enumerate(task_ids):
            for j in range(plan.m):
                block = coeffs.block(g, j)
                for position in block.nonzero()[0]:
                    value = repr(float(block[position]))
                    rows.append([task_id, j, plan.shifts[j][position], value])
        return self._write_rows(rows, self._target(name))

    def save_trace(self, records: Sequence[ProgressRecord], name: str = "trace.csv") -> Path:
        """Save the per-iteration objective and active synergy count."""
        rows: list[list[object]] = [TRACE_COLUMNS]
        rows += [[r.iteration, repr(r.objective), r.active_count] for r in records]
        return self._write_rows(rows, self._target(name))

    def save_report(self, report: EvaluationReport, stem: str = "report") -> tuple[Path, Path]:
        """Save an evaluation report as JSON and CSV.

        Returns:
            Paths to the JSON and CSV files.
        """
        json_path = self._write_json(report, self._target(f"{stem}.json"))
        csv_path = self._write_rows(report.to_csv_rows(), self._target(f"{stem}.csv"))
        return json_path, csv_path

    def save_reconstructions(
        self,
        report: EvaluationReport,
        dataset: VelocityDataset,
        name: str = "reconstructions.csv",
    ) -> Path:
        """Save the reconstructed velocities in the dataset CSV layout."""
        reconstructed = VelocityDataset(
            n=dataset.n,
            T=dataset.T,
            velocities=report.reconstructions,
            sample_rate=dataset.sample_rate,
            task_ids=dataset.task_ids,
        )
        path = self._target(name)
        save_csv(reconstructed, path)
        return path

    def save_grid(
        self,
        selection: GridSelection,
        states: Sequence[AmmState],
        plan: ShiftPlan,
        sample_rate: float,
    ) -> Path:
        """Save one bank per grid point and the selection summary.

        Returns:
            Path to the selection summary.
        """
        for point, state in zip(selection.points, states):
            self.save_bank(
                TrainedBank.from_state(state, plan, sample_rate),
                self._target(Path("grid", f"bank_{point.index}.json")),
            )
        return self._write_json(selection, self._target(Path("grid", "selection.json")))

    def save_postures(
        self,
        trajectories: Sequence[AngleTrajectory],
        snapshots: Sequence[tuple[int, float, int, float]],
        stem: str = "postures",
    ) -> tuple[Path | None, Path]:
        """Save integrated synergy trajectories and their snapshot table.

        Args:
            trajectories: One angle trajectory per active synergy.
            snapshots: (synergy, fraction, joint, angle) rows, joints 1-based.
            stem: Base name of the two files.

        Returns:
            Paths to the angles CSV (None without trajectories) and the
            snapshot CSV.
        """
        angles_path = None
        if trajectories:
            angles_path = self._target(f"{stem}_angles.csv")
            save_csv(trajectories, angles_path)
        rows: list[list[object]] = [SNAPSHOT_COLUMNS]
        rows += [[j, repr(f), i, repr(a)] for j, f, i, a in snapshots]
        return angles_path, self._write_rows(rows, self._target(f"{stem}_snapshots.csv"))
