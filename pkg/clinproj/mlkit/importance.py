"""Split-count feature importance grouped by vital."""

from typing import Dict, List, Tuple

import numpy as np

from .features import DEMOGRAPHIC_FEATURES, TRUST_SUFFIX


def _group(name: str) -> str:
    if name in DEMOGRAPHIC_FEATURES or name.endswith(TRUST_SUFFIX):
        return name
    vital, _, hour = name.rpartition("_t")
    return vital if vital and hour.isdigit() else name


def feature_importance(model, top: int = 10) -> List[Tuple[str, float]]:
    """
    Rank features by how often trees split on them, over all clusters.

    The per-hour columns of a vital are averaged into one score for the
    vital; trust columns and demographics keep their own names.
    """
    counts = np.zeros(len(model.feature_names))
    for clf in model.classifiers:
        counts += clf.ensemble.split_counts
    grouped: Dict[str, List[float]] = {}
    for name, count in zip(model.feature_names, counts):
        grouped.setdefault(_group(name), []).append(float(count))
    ranked = sorted(
        ((name, float(np.mean(values))) for name, values in grouped.items()),
        key=lambda item: (-item[1], item[0]),
    )
    return ranked[:top]
