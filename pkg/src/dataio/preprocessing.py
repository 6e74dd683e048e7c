"""Differentiation, integration and smoothing of joint trajectories."""

import logging
from typing import Sequence

import numpy as np
from scipy.signal import savgol_filter

from src.exceptions import ConfigurationError, DimensionError, InputError
from src.model import VelocityDataset

from .models import AngleTrajectory

logger = logging.getLogger(__name__)


def differentiate(angles: AngleTrajectory) -> np.ndarray:
    """Angular velocities of a trajectory, stacked time-major.

    Central differences at interior samples and one-sided differences at the
    two endpoints, scaled by the sampling rate.

    Args:
        angles: Recorded joint angles.

    Raises:
        InputError: Raised when the trajectory has fewer than two samples.

    Returns:
        Velocity vector of length n * T.
    """
    if angles.T < 2:
        raise InputError(f"differentiation needs at least 2 samples, got {angles.T}")
    velocities = np.gradient(angles.angles, 1.0 / angles.sample_rate, axis=1, edge_order=1)
    return velocities.T.ravel()


def integrate(
    velocities: np.ndarray, initial_angles: np.ndarray, sample_rate: float = 1.0
) -> AngleTrajectory:
    """Recover joint angles from time-major velocities by the rectangle rule.

    angle(1) = initial, angle(t + 1) = angle(t) + v(t) / sample_rate.

    Args:
        velocities: Time-major velocities of length n * T.
        initial_angles: Angles at the first sample, length n.
        sample_rate: Sampling rate in Hz.

    Raises:
        DimensionError: Raised when the lengths are inconsistent.
        InputError: Raised when the inputs are not finite.

    Returns:
        The integrated trajectory.
    """
    velocities = np.asarray(velocities, dtype=float)
    initial = np.asarray(initial_angles, dtype=float)
    n = initial.size
    if initial.ndim != 1 or n == 0 or velocities.ndim != 1 or velocities.size % n:
        raise DimensionError(
            f"velocity length {velocities.size} is not a multiple of the joint count {n}"
        )
    if not (np.all(np.isfinite(velocities)) and np.all(np.isfinite(initial))):
        raise InputError("velocities and initial angles must be finite")
    per_joint = velocities.reshape(-1, n).T
    steps = np.cumsum(per_joint[:, :-1], axis=1) / sample_rate
    angles = initial[:, None] + np.concatenate([np.zeros((n, 1)), steps], axis=1)
    return AngleTrajectory(angles=angles, sample_rate=sample_rate)


def check_filter_parameters(length: int, window: int, polyorder: int) -> None:
    """Validate Savitzky-Golay parameters against a signal length.

    Raises:
        ConfigurationError: Raised for an even or oversized window or a
            polynomial order not below the window.
    """
    if window < 1 or window % 2 == 0:
        raise ConfigurationError(
            f"Savitzky-Golay window must be a positive odd number, got {window}"
        )
    if window > length:
        raise ConfigurationError(f"Savitzky-Golay window {window} exceeds signal length {length}")
    if not 0 <= polyorder < window:
        raise ConfigurationError(
            f"Savitzky-Golay polyorder must be in [0, window), got {polyorder} for window {window}"
        )


def savitzky_golay(
    signal: np.ndarray, window: int = 11, polyorder: int = 3, axis: int = -1
) -> np.ndarray:
    """Least-squares polynomial smoothing over a sliding window.

    Edge samples are taken from a polynomial fitted to the first (last)
    window of the signal, so polynomials of degree <= polyorder are
    reproduced everywhere.

    Raises:
        ConfigurationError: Raised for invalid window or order.
    """
    signal = np.asarray(signal, dtype=float)
    check_filter_parameters(signal.shape[axis], window, polyorder)
    return savgol_filter(signal, window, polyorder, mode="interp", axis=axis)


def angles_to_velocities(
    trajectories: Sequence[AngleTrajectory],
    smooth_raw: bool = False,
    window: int = 11,
    polyorder: int = 3,
) -> VelocityDataset:
    """Differentiate recorded trajectories into a velocity dataset.

    Args:
        trajectories: One trajectory per task, all with the same n, T and rate.
        smooth_raw: Smooth every joint's velocity with Savitzky-Golay.
        window: Filter window when smoothing.
        polyorder: Filter order when smoothing.

    Raises:
        DimensionError: Raised when trajectories differ in shape or rate.

    Returns:
        The velocity dataset.
    """
    if not trajectories:
        raise DimensionError("at least one trajectory is required")
    first = trajectories[0]
    if any(
        t.angles.shape != first.angles.shape or t.sample_rate != first.sample_rate
        for t in trajectories
    ):
        raise DimensionError("all trajectories must share n, T and sample_rate")
    rows = []
    for trajectory in trajectories:
        v = differentiate(trajectory)
        if smooth_raw:
            v = savitzky_golay(v.reshape(first.T, first.n), window, polyorder, axis=0).ravel()
        rows.append(v)
    logger.info("Differentiated %d angle trajectories (smoothed=%s)", len(rows), smooth_raw)
    return VelocityDataset(
        n=first.n, T=first.T, velocities=np.stack(rows), sample_rate=first.sample_rate
    )
