"""Tests for the testing-phase reconstruction and its error metric."""

import numpy as np
import pytest

from src.exceptions import DegenerateInputError, DimensionError
from src.model import SynergyBank, VelocityDataset
from src.recon import (
    build_bank,
    coefficient_null_threshold,
    evaluate_suite,
    normalized_error,
    reconstruct_gesture,
    select_lambda_test,
)
from src.solvers import SolverControl

TIGHT = SolverControl(max_iters=20000, rel_tol=1e-13)


class TestNormalizedError:
    """Tests for normalized_error."""

    def test_zero_reconstruction_has_error_one(self) -> None:
        assert normalized_error(np.array([1.0, -2.0]), np.zeros(2)) == 1.0

    def test_known_value(self) -> None:
        assert normalized_error(np.array([3.0, 4.0]), np.array([3.0, 3.0])) == pytest.approx(1 / 25)

    @pytest.mark.parametrize("scale", [-3.5, 1e-3, 250.0])
    def test_invariant_under_common_scaling(self, scale: float, rng: np.random.Generator) -> None:
        v, v_hat = rng.standard_normal(20), rng.standard_normal(20)

        assert normalized_error(scale * v, scale * v_hat) == pytest.approx(
            normalized_error(v, v_hat), rel=1e-12
        )

    def test_zero_movement_zero_reconstruction(self) -> None:
        assert normalized_error(np.zeros(3), np.zeros(3)) == 0.0

    def test_zero_movement_nonzero_reconstruction_exception_raised(self) -> None:
        with pytest.raises(DegenerateInputError):
            normalized_error(np.zeros(3), np.array([0.0, 1.0, 0.0]))

    def test_length_mismatch_exception_raised(self) -> None:
        with pytest.raises(DimensionError):
            normalized_error(np.zeros(3), np.zeros(4))


class TestReconstructGesture:
    """Tests for reconstruct_gesture."""

    def test_lambda_above_null_threshold_gives_error_one(
        self, small_bank: SynergyBank, rng: np.random.Generator
    ) -> None:
        matrix = build_bank(small_bank, 12)
        v = rng.standard_normal(36)

        result = reconstruct_gesture(matrix, v, coefficient_null_threshold(matrix, v) * 1.01)

        np.testing.assert_array_equal(result.coeffs, np.zeros(matrix.ncols))
        assert result.error == 1.0

    def test_planted_column_recovered(self, small_bank: SynergyBank) -> None:
        matrix = build_bank(small_bank, 12)
        v = 2.0 * matrix.columns[:, 5]

        result = reconstruct_gesture(matrix, v, 1e-4, TIGHT)

        assert np.argmax(np.abs(result.coeffs)) == 5
        assert result.error < 1e-4

    def test_error_non_increasing_as_lambda_decreases(
        self, small_bank: SynergyBank, rng: np.random.Generator
    ) -> None:
        matrix = build_bank(small_bank, 12)
        v = rng.standard_normal(36)
        null = coefficient_null_threshold(matrix, v)

        errors = [
            reconstruct_gesture(matrix, v, null * fraction, TIGHT).error
            for fraction in (0.9, 0.5, 0.2, 0.05, 0.01)
        ]

        for previous, current in zip(errors, errors[1:]):
            assert current <= previous + 1e-6
        assert errors[-1] < errors[0]

    def test_empty_bank_reconstructs_zero(self, small_bank: SynergyBank) -> None:
        matrix = build_bank(small_bank.replace(active_flags=(False, False)), 12)

        result = reconstruct_gesture(matrix, np.ones(36), 0.1)

        assert result.coeffs.size == 0
        assert result.error == 1.0

    def test_wrong_movement_length_exception_raised(self, small_bank: SynergyBank) -> None:
        with pytest.raises(DimensionError):
            reconstruct_gesture(build_bank(small_bank, 12), np.ones(35), 0.1)


class TestEvaluateSuite:
    """Tests for evaluate_suite."""

    def test_planted_bank_reconstructs_noiseless_tasks(self, planted) -> None:
        dataset, bank, _, _ = planted

        report = evaluate_suite(bank, dataset, 1e-6, tau=1.0, filter_params=None, control=TIGHT)

        assert report.summary.mean < 1e-4
        assert report.summary.m_active == 2
        assert report.summary.columns_kept == report.summary.columns_total == 30
        assert [r.task_id for r in report.records] == list(range(1, 9))
        assert report.reconstructions.shape == dataset.velocities.shape

    def test_summary_uses_population_std(self, planted) -> None:
        dataset, bank, _, _ = planted

        report = evaluate_suite(bank, dataset, 0.5, tau=0.8)

        errors = np.array([r.error for r in report.records])
        assert report.summary.mean == pytest.approx(errors.mean())
        assert report.summary.std == pytest.approx(errors.std(ddof=0))
        assert report.summary.mean_defined

    def test_empty_bank_every_error_one(self, planted) -> None:
        dataset, bank, _, _ = planted
        empty = bank.replace(active_flags=(False, False))

        report = evaluate_suite(empty, dataset, 0.01)

        assert all(r.error == 1.0 for r in report.records)
        assert report.summary.columns_kept == 0
        assert report.summary.m_active == 0

    def test_empty_test_set_mean_undefined(self, planted) -> None:
        _, bank, _, _ = planted
        empty = VelocityDataset(n=3, T=20, velocities=np.zeros((0, 60)))

        report = evaluate_suite(bank, empty, 0.01)

        assert report.summary.mean is None
        assert report.summary.std is None
        assert not report.summary.mean_defined
        assert report.to_csv_rows()[-4] == ["mean", "", ""]

    def test_result_independent_of_thread_count(self, planted) -> None:
        dataset, bank, _, _ = planted

        single = evaluate_suite(bank, dataset, 0.05, threads=1)
        pooled = evaluate_suite(bank, dataset, 0.05, threads=4)

        np.testing.assert_array_equal(single.reconstructions, pooled.reconstructions)

    def test_joint_count_mismatch_exception_raised(self, planted) -> None:
        dataset, _, _, _ = planted
        bank = SynergyBank(n=2, T_s=6, templates=np.ones((1, 12)))

        with pytest.raises(DimensionError):
            evaluate_suite(bank, dataset, 0.01)

    def test_report_json_leaves_out_reconstructions(self, planted) -> None:
        dataset, bank, _, _ = planted

        document = evaluate_suite(bank, dataset, 0.05).model_dump()

        assert "reconstructions" not in document
        assert document["schema_version"] == 1


class TestSelectLambdaTest:
    """Tests for select_lambda_test."""

    def test_smaller_weight_wins_on_planted_data(self, planted) -> None:
        dataset, bank, _, _ = planted

        chosen = select_lambda_test(bank, dataset, [1e6, 1e-3], tau=1.0, filter_params=None)

        assert chosen == 1e-3

    def test_tie_goes_to_earlier_value(self, planted) -> None:
        dataset, bank, _, _ = planted

        assert select_lambda_test(bank, dataset, [1e6, 1e7]) == 1e6

    def test_empty_grid_exception_raised(self, planted) -> None:
        dataset, bank, _, _ = planted

        with pytest.raises(ValueError):
            select_lambda_test(bank, dataset, [])
