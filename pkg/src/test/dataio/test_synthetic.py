"""Tests for the planted-synergy data generator."""

from pathlib import Path

import numpy as np
import pytest

from src.dataio import (
    SyntheticSpec,
    SyntheticTruth,
    empirical_snr_db,
    generate_synthetic,
    generate_tasks,
    truth_document,
)
from src.exceptions import ConfigurationError
from src.model import ShiftPlan, reconstruct


class TestGenerateSynthetic:
    """Tests for generate_synthetic."""

    def test_noiseless_data_equals_planted_model(self) -> None:
        spec = SyntheticSpec(m_true=2, active_shifts_per_task=3, snr_db=None, seed=4)
        plan = ShiftPlan.uniform(T=15, T_s=5, m=2)

        dataset, bank, coeffs = generate_synthetic(spec, n=3, T=15, T_s=5, G=6, plan=plan)

        np.testing.assert_array_equal(dataset.velocities, reconstruct(bank, coeffs, plan))

    def test_templates_unit_norm_and_activations_sparse(self) -> None:
        spec = SyntheticSpec(m_true=3, active_shifts_per_task=2, seed=8, amplitude_range=(1, 2))

        _, bank, coeffs = generate_synthetic(spec, n=2, T=12, T_s=4, G=10)

        np.testing.assert_allclose(bank.norms(), 1.0, atol=1e-12)
        assert all(np.count_nonzero(row) == 2 for row in coeffs.values)
        nonzero = coeffs.values[coeffs.values != 0]
        assert np.all((nonzero >= 1.0) & (nonzero <= 2.0))

    def test_zero_active_shifts_gives_zero_data(self) -> None:
        spec = SyntheticSpec(m_true=2, active_shifts_per_task=0, snr_db=None, seed=1)

        dataset, _, coeffs = generate_synthetic(spec, n=2, T=10, T_s=3, G=4)

        np.testing.assert_array_equal(dataset.velocities, np.zeros((4, 20)))
        assert coeffs.nnz() == 0

    def test_empirical_snr_close_to_requested(self) -> None:
        spec = SyntheticSpec(m_true=2, active_shifts_per_task=2, snr_db=15.0, seed=6)
        plan = ShiftPlan.uniform(T=20, T_s=6, m=2)

        dataset, bank, coeffs = generate_synthetic(spec, n=3, T=20, T_s=6, G=60, plan=plan)

        clean = reconstruct(bank, coeffs, plan)
        assert abs(empirical_snr_db(clean, dataset.velocities) - 15.0) <= 0.5

    def test_same_seed_identical_output(self) -> None:
        spec = SyntheticSpec(m_true=2, active_shifts_per_task=2, seed=13)

        first, _, _ = generate_synthetic(spec, n=2, T=10, T_s=3, G=5)
        second, _, _ = generate_synthetic(spec, n=2, T=10, T_s=3, G=5)

        np.testing.assert_array_equal(first.velocities, second.velocities)

    def test_too_many_activations_exception_raised(self) -> None:
        spec = SyntheticSpec(m_true=1, active_shifts_per_task=5, seed=0)

        with pytest.raises(ConfigurationError):
            generate_synthetic(spec, n=1, T=4, T_s=2, G=1)

    def test_template_longer_than_window_exception_raised(self) -> None:
        spec = SyntheticSpec(m_true=1, active_shifts_per_task=1, seed=0)

        with pytest.raises(ConfigurationError):
            generate_synthetic(spec, n=1, T=4, T_s=5, G=1)


class TestEmpiricalSnr:
    """Tests for empirical_snr_db."""

    def test_known_ratio(self) -> None:
        clean = np.array([10.0, 0.0])

        assert empirical_snr_db(clean, clean + np.array([0.0, 1.0])) == pytest.approx(20.0)

    def test_identical_signals_infinite(self) -> None:
        assert empirical_snr_db(np.ones(3), np.ones(3)) == float("inf")


class TestTruthDocument:
    """Tests for the serializable ground truth."""

    def test_saved_truth_restores_bank_and_coefficients(self, tmp_path: Path) -> None:
        spec = SyntheticSpec(m_true=2, active_shifts_per_task=2, seed=5)
        plan = ShiftPlan.uniform(T=12, T_s=4, m=2)
        _, bank, coeffs = generate_synthetic(spec, n=2, T=12, T_s=4, G=3, plan=plan)
        path = tmp_path / "truth.json"

        truth_document(spec, bank, coeffs, plan, sample_rate=100.0).save(path)

        loaded = SyntheticTruth.load(path)
        assert loaded.sample_rate == 100.0
        assert len(loaded.amplitudes) == 6
        np.testing.assert_allclose(loaded.to_bank().templates, bank.templates, rtol=1e-15)
        np.testing.assert_allclose(loaded.to_coefficients(3).values, coeffs.values, rtol=1e-15)
        assert loaded.to_plan() == plan

    def test_held_out_tasks_are_new_but_reproducible(self) -> None:
        spec = SyntheticSpec(m_true=2, active_shifts_per_task=2, seed=5)
        plan = ShiftPlan.uniform(T=12, T_s=4, m=2)
        train, bank, coeffs = generate_synthetic(spec, n=2, T=12, T_s=4, G=3, plan=plan)
        truth = truth_document(spec, bank, coeffs, plan)

        first, first_coeffs = generate_tasks(truth, 3)
        second, _ = generate_tasks(truth, 3)

        np.testing.assert_array_equal(first.velocities, second.velocities)
        assert not np.array_equal(first.velocities, train.velocities)
        assert all(np.count_nonzero(row) == 2 for row in first_coeffs.values)
