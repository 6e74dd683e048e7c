"""Dataset ingestion, preprocessing and synthetic ground-truth generation."""

from .csv_io import load_csv, save_csv
from .models import AmplitudeRecord, AngleTrajectory, SyntheticSpec, SyntheticTruth
from .preprocessing import angles_to_velocities, differentiate, integrate, savitzky_golay
from .synthetic import empirical_snr_db, generate_synthetic, generate_tasks, truth_document

__all__ = [
    "AmplitudeRecord",
    "AngleTrajectory",
    "SyntheticSpec",
    "SyntheticTruth",
    "angles_to_velocities",
    "differentiate",
    "empirical_snr_db",
    "generate_synthetic",
    "generate_tasks",
    "integrate",
    "load_csv",
    "save_csv",
    "savitzky_golay",
    "truth_document",
]
