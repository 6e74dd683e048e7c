"""Synthetic datasets drawn from planted synergies with known activations."""

import logging

import numpy as np

from src.exceptions import ConfigurationError
from src.model import CoefficientSet, ShiftPlan, SynergyBank, VelocityDataset, reconstruct

from .models import AmplitudeRecord, SyntheticSpec, SyntheticTruth
from .preprocessing import savitzky_golay

logger = logging.getLogger(__name__)

HELD_OUT_STREAM = 1


def empirical_snr_db(clean: np.ndarray, noisy: np.ndarray) -> float:
    """Signal-to-noise ratio 10 log10(||clean||^2 / ||noisy - clean||^2) in dB."""
    noise = float(np.sum((np.asarray(noisy) - np.asarray(clean)) ** 2))
    signal = float(np.sum(np.asarray(clean) ** 2))
    if noise == 0.0:
        return float("inf")
    return 10.0 * np.log10(signal / noise)


def _smooth_templates(raw: np.ndarray, spec: SyntheticSpec) -> np.ndarray:
    """Smooth (m, n, T_s) random waveforms along time and normalize each template."""
    T_s = raw.shape[2]
    window = min(spec.smooth_window, T_s if T_s % 2 else T_s - 1)
    if window > spec.smooth_polyorder:
        raw = savitzky_golay(raw, window, spec.smooth_polyorder, axis=2)
    templates = raw.reshape(raw.shape[0], -1)
    return templates / np.linalg.norm(templates, axis=1, keepdims=True)


def _draw_tasks(
    rng: np.random.Generator, bank: SynergyBank, plan: ShiftPlan, spec: SyntheticSpec, G: int
) -> tuple[VelocityDataset, CoefficientSet]:
    active = spec.active_shifts_per_task
    if active > plan.total:
        raise ConfigurationError(
            f"active_shifts_per_task={active} exceeds the {plan.total} "
            "available (synergy, shift) pairs"
        )
    values = np.zeros((G, plan.total))
    low, high = spec.amplitude_range
    for g in range(G):
        chosen = rng.choice(plan.total, size=active, replace=False)
        values[g, chosen] = rng.uniform(low, high, size=active)
    coeffs = CoefficientSet(sizes=plan.sizes, values=values)

    clean = reconstruct(bank, coeffs, plan)
    velocities = clean
    if not spec.noiseless and G > 0:
        power = float(np.mean(clean**2))
        if power == 0.0:
            power = 1.0
        sigma = np.sqrt(power / 10.0 ** (spec.snr_db / 10.0))
        velocities = clean + rng.normal(0.0, sigma, size=clean.shape)
    dataset = VelocityDataset(n=bank.n, T=plan.T, velocities=velocities)
    return dataset, coeffs


def generate_synthetic(
    spec: SyntheticSpec, n: int, T: int, T_s: int, G: int, plan: ShiftPlan | None = None
) -> tuple[VelocityDataset, SynergyBank, CoefficientSet]:
    """Draw planted synergies, sparse activations and noisy velocities.

    Templates are Gaussian waveforms smoothed along time and normalized to
    unit norm. Every task activates active_shifts_per_task distinct
    (synergy, shift) pairs, chosen uniformly, with amplitudes uniform in
    amplitude_range. I.i.d. Gaussian noise is scaled so the power ratio
    of clean signal to noise over the whole dataset is snr_db (with unit
    reference power when there is no signal at all).

    Args:
        spec: Generator parameters.
        n: Joint count.
        T: Window length.
        T_s: Template length.
        G: Task count.
        plan: Shift plan of the planted synergies, defaults to the full
            uniform grid.

    Raises:
        ConfigurationError: Raised when the parameters are infeasible.

    Returns:
        The dataset, the planted bank and the planted coefficients.
    """
    if T_s > T:
        raise ConfigurationError(f"synergy length T_s={T_s} exceeds trajectory length T={T}")
    plan = plan or ShiftPlan.uniform(T, T_s, spec.m_true)
    if plan.m != spec.m_true or plan.T != T or plan.T_s != T_s:
        raise ConfigurationError("shift plan does not match m_true, T and T_s")
    rng = np.random.default_rng(spec.seed)
    raw = rng.standard_normal((spec.m_true, n, T_s))
    bank = SynergyBank(n=n, T_s=T_s, templates=_smooth_templates(raw, spec))
    dataset, coeffs = _draw_tasks(rng, bank, plan, spec, G)
    logger.info(
        "Generated synthetic data: n=%d T=%d G=%d m_true=%d snr_db=%s",
        n, T, G, spec.m_true, spec.snr_db,
    )
    return dataset, bank, coeffs


def generate_tasks(truth: SyntheticTruth, G: int) -> tuple[VelocityDataset, CoefficientSet]:
    """Draw G further tasks (e.g. a held-out test set) from an existing ground truth.

    The draws come from a random stream derived from the truth's seed that
    is distinct from the one of the training tasks.
    """
    rng = np.random.default_rng([truth.seed, HELD_OUT_STREAM])
    dataset, coeffs = _draw_tasks(rng, truth.to_bank(), truth.to_plan(), truth.spec, G)
    return dataset.model_copy(update={"sample_rate": truth.sample_rate}), coeffs


def truth_document(
    spec: SyntheticSpec,
    bank: SynergyBank,
    coeffs: CoefficientSet,
    plan: ShiftPlan,
    sample_rate: float = 1.0,
) -> SyntheticTruth:
    """Serializable ground truth of a generated dataset."""
    records = [
        AmplitudeRecord(
            task=g,
            synergy=j,
            shift=plan.shifts[j][position],
            amplitude=float(coeffs.block(g, j)[position]),
        )
        for g in range(coeffs.G)
        for j in range(plan.m)
        for position in np.flatnonzero(coeffs.block(g, j))
    ]
    return SyntheticTruth(
        n=bank.n,
        T=plan.T,
        T_s=plan.T_s,
        sample_rate=sample_rate,
        templates=bank.templates.tolist(),
        shifts=[list(s) for s in plan.shifts],
        amplitudes=records,
        seed=spec.seed,
        spec=spec,
    )
