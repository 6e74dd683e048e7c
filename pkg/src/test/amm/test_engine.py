"""Tests for the alternating minimization engine."""

import numpy as np
import pytest

from src.amm import (
    AmmConfig,
    AmmState,
    GridConfig,
    c_step,
    fit_term,
    grid_search,
    initialize,
    make_plan,
    normalize_rescale,
    objective,
    prune_inactive,
    run,
    s_step,
)
from src.dataio import SyntheticSpec, generate_synthetic, generate_tasks, truth_document
from src.exceptions import ConfigurationError
from src.model import (
    CoefficientSet,
    ShiftPlan,
    SynergyBank,
    VelocityDataset,
    dictionary_apply,
    group_null_threshold,
    reconstruct,
)
from src.recon import ReconParams, evaluate_suite
from src.solvers import SolverControl, SparseGroupPenalty
from src.test.oracles import brute_force_task, dense_ridge

TIGHT = SolverControl(max_iters=5000, rel_tol=1e-13)


def state_for(bank: SynergyBank, coeffs: CoefficientSet) -> AmmState:
    return AmmState(bank=bank, coeffs=coeffs, dormant_streak=(0,) * bank.m)


def zero_data(n: int, T: int, G: int) -> VelocityDataset:
    return VelocityDataset(n=n, T=T, velocities=np.zeros((G, n * T)))


def scalar_objective(state, data, plan, config) -> float:
    """Straight evaluation of the joint objective with loops over tasks and synergies."""
    total = 0.0
    lam = config.alpha / (2 * data.G)
    for g in range(data.G):
        fitted = np.zeros(data.n * data.T)
        penalty = 0.0
        smoothing = 0.0
        for j in state.bank.active_indices:
            block = state.coeffs.block(g, j)
            fitted += brute_force_task(state.bank.templates[j : j + 1], [block], data.n,
                                       ShiftPlan(T=plan.T, T_s=plan.T_s, shifts=(plan.shifts[j],)))
            penalty += config.penalty.lambda1 * np.linalg.norm(block)
            penalty += config.penalty.lambda2 * np.sum(np.abs(block))
            smoothing += lam * np.sum(state.bank.templates[j] ** 2)
        total += 0.5 * np.sum((data.task(g) - fitted) ** 2) + penalty + smoothing
    return total


class TestInitialize:
    """Tests for the random initialization."""

    def test_same_seed_identical_states(self) -> None:
        config = AmmConfig(m_int=4, T_s=5, seed=11)
        data = zero_data(3, 12, 2)
        plan = make_plan(config, 12)

        first = initialize(config, data, plan)
        second = initialize(config, data, plan)

        np.testing.assert_array_equal(first.bank.templates, second.bank.templates)

    def test_templates_have_unit_norm(self) -> None:
        config = AmmConfig(m_int=6, T_s=5, seed=2)
        state = initialize(config, zero_data(3, 12, 2), make_plan(config, 12))

        np.testing.assert_allclose(state.bank.norms(), 1.0, atol=1e-12)

    def test_recorded_data_scale_dimensions(self) -> None:
        config = AmmConfig(m_int=10, T_s=39)
        plan = make_plan(config, 82)

        state = initialize(config, zero_data(10, 82, 1), plan)

        assert state.bank.templates.shape == (10, 390)
        assert state.coeffs.sizes == (44,) * 10
        assert state.coeffs.values.shape == (1, 440)

    def test_template_longer_than_window_exception_raised(self) -> None:
        with pytest.raises(ConfigurationError):
            make_plan(AmmConfig(T_s=13), 12)


class TestCStep:
    """Tests for the coefficient update."""

    def test_zero_data_zero_coefficients(
        self, small_bank: SynergyBank, small_plan: ShiftPlan
    ) -> None:
        state = state_for(small_bank, CoefficientSet.zeros(2, small_plan))

        coeffs = c_step(state, zero_data(3, 12, 2), small_plan, AmmConfig(m_int=2, T_s=4))

        np.testing.assert_array_equal(coeffs.values, np.zeros((2, 18)))

    def test_planted_activation_concentrates_on_its_group(
        self, small_bank: SynergyBank, small_plan: ShiftPlan
    ) -> None:
        task = dictionary_apply(small_bank.template(0), np.eye(9)[0], small_plan, synergy=0)
        data = VelocityDataset(n=3, T=12, velocities=task[None, :])
        config = AmmConfig(
            m_int=2, T_s=4, penalty=SparseGroupPenalty(lambda1=0.01, lambda2=0.01), c_control=TIGHT
        )

        coeffs = c_step(state_for(small_bank, CoefficientSet.zeros(1, small_plan)), data,
                        small_plan, config)

        norms = coeffs.group_norms()[0]
        assert np.argmax(norms) == 0
        assert np.argmax(np.abs(coeffs.block(0, 0))) == 0

    def test_group_weight_above_null_threshold_all_zero(
        self, small_bank: SynergyBank, small_plan: ShiftPlan, rng: np.random.Generator
    ) -> None:
        data = VelocityDataset(n=3, T=12, velocities=rng.standard_normal((3, 36)))
        threshold = max(group_null_threshold(small_bank, small_plan, v) for v in data.velocities)
        config = AmmConfig(
            m_int=2, T_s=4, penalty=SparseGroupPenalty(lambda1=threshold * 1.01, lambda2=0.0)
        )

        coeffs = c_step(state_for(small_bank, CoefficientSet.zeros(3, small_plan)), data,
                        small_plan, config)

        np.testing.assert_array_equal(coeffs.values, np.zeros((3, 18)))

    def test_inactive_synergy_keeps_zero_coefficients(
        self, small_bank: SynergyBank, small_plan: ShiftPlan, rng: np.random.Generator
    ) -> None:
        data = VelocityDataset(n=3, T=12, velocities=rng.standard_normal((2, 36)))
        bank = small_bank.replace(active_flags=(False, True))

        coeffs = c_step(state_for(bank, CoefficientSet.zeros(2, small_plan)), data, small_plan,
                        AmmConfig(m_int=2, T_s=4))

        np.testing.assert_array_equal(coeffs.synergy_values(0), np.zeros((2, 9)))

    def test_result_independent_of_thread_count(
        self, small_bank: SynergyBank, small_plan: ShiftPlan, rng: np.random.Generator
    ) -> None:
        data = VelocityDataset(n=3, T=12, velocities=rng.standard_normal((5, 36)))
        state = state_for(small_bank, CoefficientSet.zeros(5, small_plan))

        single = c_step(state, data, small_plan, AmmConfig(m_int=2, T_s=4, threads=1))
        pooled = c_step(state, data, small_plan, AmmConfig(m_int=2, T_s=4, threads=4))

        np.testing.assert_array_equal(single.values, pooled.values)


class TestSStep:
    """Tests for the template update."""

    def test_zero_coefficients_bank_unchanged(
        self, small_bank: SynergyBank, small_plan: ShiftPlan, rng: np.random.Generator
    ) -> None:
        data = VelocityDataset(n=3, T=12, velocities=rng.standard_normal((2, 36)))
        state = state_for(small_bank, CoefficientSet.zeros(2, small_plan))

        bank = s_step(state, data, small_plan, AmmConfig(m_int=2, T_s=4))

        np.testing.assert_array_equal(bank.templates, small_bank.templates)

    def test_single_shift_without_ridge_copies_window_start(
        self, rng: np.random.Generator
    ) -> None:
        plan = ShiftPlan.uniform(T=8, T_s=3, m=1)
        bank = SynergyBank(n=2, T_s=3, templates=rng.standard_normal((1, 6)))
        coeffs = CoefficientSet(sizes=plan.sizes, values=np.eye(6)[:1])
        v = rng.standard_normal(16)
        data = VelocityDataset(n=2, T=8, velocities=v[None, :])
        config = AmmConfig(m_int=1, T_s=3, alpha=0.0, s_control=TIGHT)

        updated = s_step(state_for(bank, coeffs), data, plan, config)

        expected = v.reshape(8, 2)[:3].T.ravel()
        np.testing.assert_allclose(updated.templates[0], expected, atol=1e-10)

    def test_random_instance_matches_sequential_dense_ridge(
        self, small_bank: SynergyBank, small_plan: ShiftPlan, rng: np.random.Generator
    ) -> None:
        G, alpha = 3, 0.4
        coeffs = CoefficientSet(sizes=small_plan.sizes, values=rng.standard_normal((G, 18)))
        data = VelocityDataset(n=3, T=12, velocities=rng.standard_normal((G, 36)))
        config = AmmConfig(m_int=2, T_s=4, alpha=alpha, s_control=TIGHT)

        updated = s_step(state_for(small_bank, coeffs), data, small_plan, config)

        templates = small_bank.templates.copy()
        single = ShiftPlan(T=12, T_s=4, shifts=(small_plan.shifts[0],))
        for j in range(2):
            rows, targets = [], []
            for g in range(G):
                c = coeffs.block(g, j)
                B = np.stack(
                    [brute_force_task(e[None, :], [c], 3, single) for e in np.eye(12)], axis=1
                )
                other = 1 - j
                others = brute_force_task(templates[other : other + 1], [coeffs.block(g, other)],
                                          3, single)
                rows.append(B)
                targets.append(data.task(g) - others)
            templates[j] = dense_ridge(np.vstack(rows), np.concatenate(targets), alpha)
        np.testing.assert_allclose(updated.templates, templates, atol=1e-8)


class TestNormalizeRescale:
    """Tests for the scale normalization."""

    def test_norm_two_template_halved_coefficients_doubled(self) -> None:
        plan = ShiftPlan.uniform(T=3, T_s=2, m=1)
        bank = SynergyBank(n=1, T_s=2, templates=[[0.0, 2.0]])
        coeffs = CoefficientSet(sizes=plan.sizes, values=[[1.0, 0.0]])

        state = normalize_rescale(state_for(bank, coeffs))

        np.testing.assert_allclose(state.bank.templates, [[0.0, 1.0]])
        np.testing.assert_allclose(state.coeffs.values, [[2.0, 0.0]])

    def test_reconstruction_unchanged(
        self, small_bank: SynergyBank, small_plan: ShiftPlan, rng: np.random.Generator
    ) -> None:
        bank = small_bank.replace(templates=small_bank.templates * np.array([[3.0], [0.2]]))
        coeffs = CoefficientSet(sizes=small_plan.sizes, values=rng.standard_normal((4, 18)))
        data = VelocityDataset(n=3, T=12, velocities=rng.standard_normal((4, 36)))
        before = state_for(bank, coeffs)

        after = normalize_rescale(before)

        np.testing.assert_allclose(
            reconstruct(after.bank, after.coeffs, small_plan),
            reconstruct(bank, coeffs, small_plan),
            atol=1e-12,
        )
        assert abs(fit_term(after, data, small_plan) - fit_term(before, data, small_plan)) <= 1e-10

    def test_zero_template_unchanged_and_inactive(self, small_plan: ShiftPlan) -> None:
        bank = SynergyBank(n=3, T_s=4, templates=np.vstack([np.zeros(12), np.ones(12)]))

        state = normalize_rescale(state_for(bank, CoefficientSet.zeros(1, small_plan)))

        np.testing.assert_array_equal(state.bank.templates[0], np.zeros(12))
        assert state.bank.active_flags == (False, True)


class TestPruneInactive:
    """Tests for the removal of unused synergies."""

    def test_all_zero_coefficients_all_inactive(
        self, small_bank: SynergyBank, small_plan: ShiftPlan
    ) -> None:
        state = prune_inactive(state_for(small_bank, CoefficientSet.zeros(3, small_plan)), 1e-8)

        assert state.m_final == 0

    def test_dormant_synergy_survives_until_patience_runs_out(
        self, small_bank: SynergyBank, small_plan: ShiftPlan
    ) -> None:
        values = np.zeros((2, 18))
        values[:, 0] = 1.0
        state = state_for(small_bank, CoefficientSet(sizes=small_plan.sizes, values=values))

        for _ in range(2):
            state = prune_inactive(state, 1e-8, patience=3)
            assert state.bank.active_flags == (True, True)
        state = prune_inactive(state, 1e-8, patience=3)

        assert state.bank.active_flags == (True, False)

    def test_revived_synergy_resets_its_streak(
        self, small_bank: SynergyBank, small_plan: ShiftPlan
    ) -> None:
        values = np.zeros((1, 18))
        values[0, 0] = 1.0
        dormant = state_for(small_bank, CoefficientSet(sizes=small_plan.sizes, values=values))
        state = prune_inactive(dormant, 1e-8, patience=3)

        values[0, 9] = 1.0
        revived = state.model_copy(
            update={"coeffs": CoefficientSet(sizes=small_plan.sizes, values=values)}
        )
        state = prune_inactive(revived, 1e-8, patience=3)

        assert state.dormant_streak == (0, 0)

    def test_relative_threshold_scales_with_largest_group(
        self, small_bank: SynergyBank, small_plan: ShiftPlan
    ) -> None:
        values = np.zeros((1, 18))
        values[0, 0] = 1e6
        values[0, 9] = 1e-3
        state = state_for(small_bank, CoefficientSet(sizes=small_plan.sizes, values=values))

        assert prune_inactive(state, 1e-8).m_final == 2
        assert prune_inactive(state, 1e-8, relative=True).m_final == 1


class TestObjective:
    """Tests for the joint objective."""

    def test_zero_coefficients_unit_templates(
        self, small_bank: SynergyBank, small_plan: ShiftPlan, rng: np.random.Generator
    ) -> None:
        data = VelocityDataset(n=3, T=12, velocities=rng.standard_normal((4, 36)))
        config = AmmConfig(m_int=2, T_s=4, alpha=0.6)
        state = state_for(small_bank, CoefficientSet.zeros(4, small_plan))

        value = objective(state, data, small_plan, config)

        lam = config.smoothing_weight(data.G)
        expected = 0.5 * np.sum(data.velocities**2) + data.G * lam * 2
        assert value == pytest.approx(expected, rel=1e-12)

    def test_perfect_fit_without_penalties_is_zero(self, planted) -> None:
        dataset, bank, coeffs, plan = planted
        config = AmmConfig(
            m_int=2, T_s=6, alpha=0.0, penalty=SparseGroupPenalty(lambda1=0.0, lambda2=0.0)
        )

        value = objective(state_for(bank, coeffs), dataset, plan, config)

        assert value == pytest.approx(0.0, abs=1e-20)

    def test_random_state_matches_scalar_evaluation(
        self, small_bank: SynergyBank, small_plan: ShiftPlan, rng: np.random.Generator
    ) -> None:
        data = VelocityDataset(n=3, T=12, velocities=rng.standard_normal((3, 36)))
        coeffs = CoefficientSet(sizes=small_plan.sizes, values=rng.standard_normal((3, 18)))
        config = AmmConfig(
            m_int=2, T_s=4, alpha=0.7, penalty=SparseGroupPenalty(lambda1=0.3, lambda2=0.2)
        )
        state = state_for(small_bank.replace(templates=small_bank.templates * 1.5), coeffs)

        value = objective(state, data, small_plan, config)

        assert value == pytest.approx(scalar_objective(state, data, small_plan, config), rel=1e-10)


class TestRun:
    """Tests for the outer loop."""

    def test_zero_data_converges_in_one_iteration_without_synergies(self) -> None:
        config = AmmConfig(m_int=3, T_s=4, seed=5)

        state = run(config, zero_data(2, 10, 4))

        assert state.converged
        assert state.iteration == 1
        assert state.m_final == 0

    def test_same_seed_identical_traces(self, planted) -> None:
        dataset, _, _, _ = planted
        config = AmmConfig(m_int=3, T_s=6, max_outer_iters=4, seed=9)

        first = run(config, dataset)
        second = run(config, dataset)

        assert first.objective_trace == second.objective_trace
        np.testing.assert_array_equal(first.bank.templates, second.bank.templates)

    def test_progress_sink_receives_every_iteration(self, planted) -> None:
        dataset, _, _, _ = planted
        records = []

        state = run(AmmConfig(m_int=3, T_s=6, max_outer_iters=3), dataset, progress=records.append)

        assert [r.iteration for r in records] == list(range(1, state.iteration + 1))
        assert [r.objective for r in records] == state.objective_trace

    def test_each_step_does_not_increase_objective(self, planted) -> None:
        dataset, _, _, _ = planted
        config = AmmConfig(m_int=3, T_s=6, max_outer_iters=8, alpha=0.5)

        state = run(config, dataset)

        for start, after_c, after_s in state.step_objectives:
            assert after_c <= start + 1e-5 * abs(start)
            assert after_s <= after_c + 1e-5 * abs(after_c)


def planted_instance(seed: int = 21):
    spec = SyntheticSpec(m_true=3, active_shifts_per_task=2, snr_db=20.0, seed=seed)
    plan = ShiftPlan.uniform(T=30, T_s=10, m=3)
    dataset, bank, coeffs = generate_synthetic(spec, n=4, T=30, T_s=10, G=20, plan=plan)
    return dataset, truth_document(spec, bank, coeffs, plan)


@pytest.mark.slow
class TestEndToEnd:
    """Long runs on a planted instance with n = 4, T = 30, T_s = 10, G = 20."""

    def test_objective_descends_through_twenty_iterations(self) -> None:
        dataset, _ = planted_instance()
        config = AmmConfig(
            m_int=6,
            T_s=10,
            penalty=SparseGroupPenalty(lambda1=0.2, lambda2=0.05),
            alpha=0.5,
            max_outer_iters=20,
            outer_rel_tol=1e-12,
        )

        state = run(config, dataset)

        assert len(state.step_objectives) >= 20 or state.converged
        tolerance = 10 * config.c_control.rel_tol
        for start, after_c, after_s in state.step_objectives:
            assert after_c <= start + tolerance * abs(start)
            assert after_s <= after_c + tolerance * abs(after_c)

    def test_grid_selected_bank_recovers_planted_synergies(self) -> None:
        dataset, truth = planted_instance()
        test_set, _ = generate_tasks(truth, 10)
        config = AmmConfig(m_int=6, T_s=10, max_outer_iters=100, outer_rel_tol=1e-4)
        grid = GridConfig(
            lambda1=[0.3, 0.6, 1.0, 1.2, 1.5],
            lambda2=[0.01],
            alpha=[0.1],
            validation_fraction=0.2,
            max_validation_error=0.1,
        )
        recon = ReconParams(lambda_test=0.001)

        selection, states = grid_search(config, dataset, grid, recon)
        state = states[selection.selected]
        report = evaluate_suite(state.bank, test_set, recon.lambda_test, recon.tau, recon.filter)

        assert 1 <= state.m_final <= 4
        assert report.summary.mean <= 0.1

    def test_elementwise_penalty_sparsifies_trained_coefficients(self) -> None:
        dataset, _ = planted_instance()

        def active_nonzeros(lambda2: float) -> tuple[int, bool]:
            config = AmmConfig(
                m_int=6,
                T_s=10,
                penalty=SparseGroupPenalty(lambda1=0.3, lambda2=lambda2),
                alpha=0.1,
                max_outer_iters=300,
                outer_rel_tol=1e-4,
            )
            state = run(config, dataset)
            norms = state.coeffs.group_norms()
            count = sum(
                np.count_nonzero(state.coeffs.block(g, j))
                for g in range(state.coeffs.G)
                for j in range(state.coeffs.m)
                if norms[g, j] > 0
            )
            return count, state.converged

        group_only, group_only_converged = active_nonzeros(0.0)
        sparse, sparse_converged = active_nonzeros(0.1)

        assert group_only_converged and sparse_converged
        assert sparse <= 0.8 * group_only
