"""
Classification metrics.
"""

import logging
from typing import Dict, List, Optional, Sequence

import numpy as np
from sklearn.metrics import (
    average_precision_score,
    confusion_matrix,
    precision_recall_curve,
    roc_auc_score,
    roc_curve,
)

from ..schemas import CurvePoints, Metrics, MetricsSummary
from .threshold import f_score

logger = logging.getLogger(__name__)

SOFA_SEPSIS_THRESHOLD = 2


def evaluate(
    scores: Sequence[float],
    labels: Sequence[int],
    predicted: Optional[Sequence[int]] = None,
    threshold: float = 0.5,
) -> Metrics:
    """
    Compute confusion counts and rates.

    Args:
        scores: Continuous scores used for the ranking metrics
        labels: True binary labels
        predicted: Hard predictions; defaults to scores >= threshold
        threshold: Cut used only when ``predicted`` is not given

    Returns:
        Metrics; AUROC/AUPRC are None when only one class is present
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if predicted is None:
        predicted = (scores >= threshold).astype(int)
    predicted = np.asarray(predicted, dtype=int)

    tn, fp, fn, tp = (int(v) for v in confusion_matrix(labels, predicted, labels=[0, 1]).ravel())
    sensitivity = tp / (tp + fn) if tp + fn else 0.0
    specificity = tn / (tn + fp) if tn + fp else 0.0
    precision = tp / (tp + fp) if tp + fp else 0.0

    auroc = auprc = None
    if len(np.unique(labels)) == 2:
        auroc = float(roc_auc_score(labels, scores))
        auprc = float(average_precision_score(labels, scores))
    else:
        logger.warning("Single-class labels; ranking metrics omitted", extra={"n": len(labels)})

    return Metrics(
        tp=tp, fp=fp, tn=tn, fn=fn,
        sensitivity=sensitivity,
        specificity=specificity,
        precision=precision,
        f_score=f_score(precision, sensitivity),
        auroc=auroc,
        auprc=auprc,
    )


def curves(scores: Sequence[float], labels: Sequence[int]) -> Dict[str, CurvePoints]:
    """ROC (fpr, tpr) and precision-recall (recall, precision) points."""
    labels = np.asarray(labels, dtype=int)
    if len(np.unique(labels)) < 2:
        return {}
    fpr, tpr, _ = roc_curve(labels, scores)
    precision, recall, _ = precision_recall_curve(labels, scores)
    return {
        "roc": CurvePoints(x=fpr.tolist(), y=tpr.tolist()),
        "pr": CurvePoints(x=recall.tolist(), y=precision.tolist()),
    }


def sofa_baseline(subpatients: Sequence) -> Metrics:
    """Predict sepsis iff window SOFA >= 2; the raw SOFA value ranks for AUROC."""
    sofa = np.array([sp.sofa for sp in subpatients], dtype=float)
    labels = np.array([sp.label for sp in subpatients], dtype=int)
    return evaluate(sofa, labels, predicted=(sofa >= SOFA_SEPSIS_THRESHOLD).astype(int))


def summarize_metrics(runs: List[Metrics]) -> MetricsSummary:
    """Mean and population standard deviation of every field over repeated runs."""
    fields = list(Metrics.model_fields)
    mean, std = {}, {}
    for name in fields:
        values = [getattr(m, name) for m in runs if getattr(m, name) is not None]
        if values:
            mean[name] = float(np.mean(values))
            std[name] = float(np.std(values))
    return MetricsSummary(iterations=len(runs), mean=mean, std=std)
