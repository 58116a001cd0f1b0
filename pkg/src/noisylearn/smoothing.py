"""Label-smoothed target distributions for cross-entropy training."""

from __future__ import annotations

import numpy as np


def _check_args(n_classes: int, epsilon: float) -> None:
    if n_classes < 2:
        raise ValueError(f"n_classes must be >= 2, got {n_classes}")
    if not 0 <= epsilon < 1:
        raise ValueError(f"epsilon must be in [0, 1), got {epsilon}")


def lsr_target(label: int, n_classes: int, epsilon: float) -> np.ndarray:
    """Smoothed one-hot distribution: 1-epsilon on the label, the rest shared.

    Off-label entries each get epsilon / (n_classes - 1); epsilon=0 gives an
    exact one-hot vector.
    """
    _check_args(n_classes, epsilon)
    if not 0 <= label < n_classes:
        raise ValueError(f"label {label} out of range [0, {n_classes})")
    dist = np.full(n_classes, epsilon / (n_classes - 1))
    dist[label] = 1.0 - epsilon
    return dist


def lsr_targets(labels: np.ndarray, n_classes: int, epsilon: float) -> np.ndarray:
    """Row-stacked smoothed targets for an array of integer labels."""
    _check_args(n_classes, epsilon)
    labels = np.asarray(labels, dtype=int)
    if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
        raise ValueError("labels out of range")
    out = np.full((labels.shape[0], n_classes), epsilon / (n_classes - 1))
    out[np.arange(labels.shape[0]), labels] = 1.0 - epsilon
    return out
