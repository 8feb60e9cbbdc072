"""Decision-threshold selection by f-score."""

import numpy as np

from ..errors import TrainingError


def f_score(precision: float, recall: float) -> float:
    """Harmonic mean of precision and recall; 0 when both are 0."""
    total = precision + recall
    return 0.0 if total == 0 else 2.0 * precision * recall / total


def threshold_grid(step: float = 0.01) -> np.ndarray:
    """Interior grid points step, 2*step, ... strictly below 1."""
    n = int(round(1.0 / step))
    return np.round(np.arange(1, n) * step, 10)


def select_threshold(probs: np.ndarray, labels: np.ndarray, step: float = 0.01) -> float:
    """
    Grid threshold with the best f-score, predicting positive when prob >= threshold.

    Ties go to the lowest threshold.
    """
    probs = np.asarray(probs, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if labels.sum() == 0:
        raise TrainingError("threshold selection needs at least one positive label")
    if ((probs < 0) | (probs > 1)).any():
        raise ValueError("probabilities must lie in [0, 1]")

    grid = threshold_grid(step)
    predicted = probs[None, :] >= grid[:, None]
    tp = (predicted & (labels == 1)).sum(axis=1)
    fp = (predicted & (labels == 0)).sum(axis=1)
    fn = labels.sum() - tp
    # 2PR/(P+R) == 2tp/(2tp+fp+fn), with 0 when tp == 0.
    denom = 2 * tp + fp + fn
    scores = np.where(tp > 0, 2.0 * tp / np.maximum(denom, 1), 0.0)
    return float(grid[int(np.argmax(scores))])
