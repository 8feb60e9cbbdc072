"""Feature-vector layout."""

from typing import List, Optional, Sequence

import numpy as np

from ..schemas import Gender

DEMOGRAPHIC_FEATURES = ["Age", "Gender", "SOFA", "SIRS"]
TRUST_SUFFIX = "_trust"


def feature_names(vitals: Sequence[str], window: int, use_trust: bool = True) -> List[str]:
    """Window values (vital-major), then trust scores, then demographics and scores."""
    names = [f"{v}_t{t}" for v in vitals for t in range(window)]
    if use_trust:
        names += [f"{v}{TRUST_SUFFIX}" for v in vitals]
    return names + DEMOGRAPHIC_FEATURES


def build_features(subpatients: Sequence, values: Sequence[np.ndarray],
                   trust: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Stack one feature row per sub-patient.

    ``values`` holds the |V| x W window used for each row (corrected data,
    or the uncorrected data for the no-trust variant); ``trust`` is N x |V|
    or None to leave the trust block out.
    """
    if len(subpatients) != len(values):
        raise ValueError("one window per sub-patient required")
    if trust is not None and len(trust) != len(subpatients):
        raise ValueError("one trust row per sub-patient required")
    rows = []
    for i, sp in enumerate(subpatients):
        parts = [np.asarray(values[i], dtype=float).ravel()]
        if trust is not None:
            parts.append(np.asarray(trust[i], dtype=float))
        parts.append(np.array([
            sp.age,
            1.0 if Gender(sp.gender) is Gender.M else 0.0,
            float(sp.sofa),
            float(sp.sirs),
        ]))
        rows.append(np.concatenate(parts))
    X = np.vstack(rows) if rows else np.zeros((0, 0))
    if not np.isfinite(X).all():
        raise ValueError("feature matrix contains non-finite entries")
    return X
