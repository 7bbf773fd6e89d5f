"""Curve aggregation."""

from __future__ import annotations

import numpy as np


def compute_auc(curve) -> float:
    """Trapezoidal area under a per-step cumulative-reward curve, over total steps.

    ``curve[t]`` is the cumulative reward after real step ``t + 1``; the curve
    starts from 0 at step 0.
    """
    c = np.asarray(curve, dtype=float)
    if c.size == 0:
        raise ValueError("compute_auc needs a non-empty curve")
    padded = np.concatenate(([0.0], c))
    area = 0.5 * float(np.sum(padded[1:] + padded[:-1]))
    return area / c.size


def mean_and_stderr(curves) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise mean and standard error of equal-length curves."""
    stack = np.asarray(curves, dtype=float)
    mean = stack.mean(axis=0)
    if stack.shape[0] < 2:
        return mean, np.zeros_like(mean)
    return mean, stack.std(axis=0, ddof=1) / np.sqrt(stack.shape[0])
