"""Proximal operators of the l1 norm, the l2 norm and their sparse group sum."""

from typing import Sequence

import numpy as np


def prox_soft_threshold(x: np.ndarray, tau: float | np.ndarray) -> np.ndarray:
    """Prox of tau * ||.||_1: y_i = sign(x_i) * max(|x_i| - tau, 0).

    Args:
        x: Input vector.
        tau: Non-negative threshold (scalar or one per entry).

    Returns:
        The soft-thresholded vector.
    """
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.maximum(np.abs(x) - tau, 0.0)


def prox_group(x: np.ndarray, tau: float) -> np.ndarray:
    """Prox of tau * ||.||_2 (not squared): block soft-thresholding.

    Args:
        x: Input vector.
        tau: Non-negative threshold.

    Returns:
        The zero vector if ||x||_2 <= tau, x * (1 - tau / ||x||_2) otherwise.
    """
    x = np.asarray(x, dtype=float)
    norm = np.linalg.norm(x)
    if norm <= tau:
        return np.zeros_like(x)
    return x * (1.0 - tau / norm)


def group_norms(x: np.ndarray, sizes: Sequence[int]) -> np.ndarray:
    """Euclidean norm of every contiguous group of x."""
    starts = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(int)
    return np.sqrt(np.add.reduceat(np.asarray(x, dtype=float) ** 2, starts))


def prox_sparse_group(
    x: np.ndarray,
    sizes: Sequence[int],
    tau1: float | np.ndarray,
    tau2: float,
) -> np.ndarray:
    """Exact prox of Sum_groups (tau1_g * ||x_g||_2 + tau2 * ||x_g||_1).

    It is the composition prox_group(prox_soft_threshold(x, tau2), tau1)
    applied group by group, vectorized over contiguous groups.

    Args:
        x: Concatenated vector.
        sizes: Sizes of the contiguous groups partitioning x.
        tau1: Group threshold, a scalar or one value per group.
        tau2: Elementwise threshold.

    Returns:
        The prox value, same shape as x.
    """
    y = prox_soft_threshold(x, tau2)
    if np.all(np.asarray(tau1) == 0):
        return y
    norms = group_norms(y, sizes)
    ratio = np.divide(tau1, norms, out=np.full_like(norms, np.inf), where=norms > 0)
    scale = np.maximum(1.0 - ratio, 0.0)
    return y * np.repeat(scale, sizes)
