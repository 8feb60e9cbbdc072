"""Sepsis onset rules."""

from typing import Optional

import numpy as np

# Suspicion-relative window in which an organ-failure time counts.
SOFA_BEFORE_SUSPICION = 24.0
SOFA_AFTER_SUSPICION = 12.0


def derive_sepsis_onset(t_suspicion: float, t_sofa: float) -> Optional[float]:
    """Earlier of the two times when the SOFA time falls in the suspicion window, else None."""
    if t_suspicion < 0 or t_sofa < 0:
        raise ValueError("onset timestamps must be non-negative")
    if t_suspicion - SOFA_BEFORE_SUSPICION <= t_sofa <= t_suspicion + SOFA_AFTER_SUSPICION:
        return min(t_suspicion, t_sofa)
    return None


def onset_hour(labels: np.ndarray, lead_hours: int = 6) -> Optional[int]:
    """Onset hour implied by labels that switch on ``lead_hours`` before onset."""
    positive = np.flatnonzero(np.asarray(labels) == 1)
    if positive.size == 0:
        return None
    return int(positive[0]) + lead_hours
