"""First-alert timing relative to sepsis onset."""

from collections import Counter
from typing import Dict, Iterable, Optional, Sequence

import numpy as np


def time_to_detection(model, features: np.ndarray, window_ends: Sequence[int],
                      onset: int) -> Optional[int]:
    """
    Hours between the first positive window and onset.

    ``features`` holds one row per window of a single patient and
    ``window_ends`` the matching end hours; the alert time of a window is
    its end hour. Negative values mean the alert came after onset. None
    when no window is predicted positive.
    """
    if len(features) != len(window_ends):
        raise ValueError("one window end per feature row required")
    if len(window_ends) == 0:
        return None
    order = np.argsort(np.asarray(window_ends), kind="stable")
    _, labels, _ = model.predict_batch(np.asarray(features)[order])
    hits = np.flatnonzero(labels == 1)
    if hits.size == 0:
        return None
    return int(onset - np.asarray(window_ends)[order][hits[0]])


def detection_histogram(offsets: Iterable[Optional[int]]) -> Dict[str, object]:
    """Integer-hour histogram of detection offsets plus the never-alerted count."""
    offsets = list(offsets)
    hits = Counter(o for o in offsets if o is not None)
    return {
        "patients": len(offsets),
        "never_alerted": sum(o is None for o in offsets),
        "histogram": {str(h): hits[h] for h in sorted(hits)},
    }
