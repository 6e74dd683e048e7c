"""General fixtures for the test suite."""

import json
from pathlib import Path
from typing import Any, Callable

import numpy as np
import pytest

from src.dataio import SyntheticSpec, generate_synthetic
from src.model import CoefficientSet, ShiftPlan, SynergyBank, VelocityDataset
from src.utils.config import ConfigManager


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture()
def small_plan() -> ShiftPlan:
    """Two synergies of 4 samples in a 12-sample window, all 9 shifts."""
    return ShiftPlan.uniform(T=12, T_s=4, m=2)


@pytest.fixture()
def small_bank(rng: np.random.Generator) -> SynergyBank:
    """Two random unit-norm templates over 3 joints."""
    templates = rng.standard_normal((2, 3 * 4))
    templates /= np.linalg.norm(templates, axis=1, keepdims=True)
    return SynergyBank(n=3, T_s=4, templates=templates)


@pytest.fixture()
def planted() -> tuple[VelocityDataset, SynergyBank, CoefficientSet, ShiftPlan]:
    """Noiseless planted dataset: 2 synergies, 3 joints, 20 samples, 8 tasks."""
    spec = SyntheticSpec(m_true=2, active_shifts_per_task=2, snr_db=None, seed=3)
    plan = ShiftPlan.uniform(T=20, T_s=6, m=2)
    dataset, bank, coeffs = generate_synthetic(spec, n=3, T=20, T_s=6, G=8, plan=plan)
    return dataset, bank, coeffs, plan


@pytest.fixture(autouse=True)
def reset_config_manager():
    """Forget the configuration loaded by a previous test."""
    yield
    ConfigManager._instance = None
    ConfigManager._config_file_path = None


@pytest.fixture()
def write_config(tmp_path: Path) -> Callable[..., Path]:
    """Write a run configuration into tmp_path and return its path.

    Keyword arguments are merged on top of a small synthetic setup whose
    files all live below tmp_path.
    """

    def _write(**overrides: Any) -> Path:
        config: dict[str, Any] = {
            "schema_version": 1,
            "logging_config": {"level": "WARNING"},
            "paths": {
                "dataset": "data/train.csv",
                "truth": "data/truth.json",
                "test_dataset": "data/test.csv",
                "bank": "output/bank.json",
                "output_dir": "output",
            },
            "synthetic": {
                "n": 2,
                "T": 16,
                "T_s": 5,
                "G": 6,
                "test_G": 3,
                "sample_rate": 100.0,
                "spec": {"m_true": 2, "active_shifts_per_task": 2, "snr_db": 30.0, "seed": 7},
            },
            "amm": {
                "m_int": 3,
                "T_s": 5,
                "penalty": {"lambda1": 0.01, "lambda2": 0.01},
                "alpha": 0.1,
                "max_outer_iters": 5,
                "seed": 1,
            },
            "recon": {"lambda_test": 0.001, "tau": 0.8, "filter": {"window": 11, "polyorder": 3}},
            "threads": 1,
        }
        config.update(overrides)
        path = tmp_path / "config.json"
        path.write_text(json.dumps(config), encoding="utf-8")
        return path

    return _write
