"""
Projection onto the normal set and trust scores.

The normal set is the unit box in solve-space, so its projection is a
componentwise clamp and needs no solver.
"""

import logging
from typing import Optional, Sequence, Tuple

import numpy as np
from sklearn.preprocessing import MinMaxScaler

logger = logging.getLogger(__name__)


def normal_projection(window: np.ndarray) -> np.ndarray:
    """Closest point of [0, 1]^(V x W)."""
    return np.clip(np.asarray(window, dtype=float), 0.0, 1.0)


def project_normal(corrected: np.ndarray) -> np.ndarray:
    """Per-vital squared distance of a |V| x W window from the normal box."""
    corrected = np.asarray(corrected, dtype=float)
    if not np.isfinite(corrected).all():
        raise ValueError("window contains non-finite values")
    return ((corrected - normal_projection(corrected)) ** 2).sum(axis=1)


class TrustScaler:
    """
    Per-vital min-max scaling of normal-set distances.

    Statistics are frozen at fit time; later values are clipped into
    [0, 1], and a column that was constant at fit time always scores 0.
    """

    def __init__(self):
        self._scaler = MinMaxScaler(clip=True)
        self._constant: Optional[np.ndarray] = None

    def fit(self, norm_dists: np.ndarray) -> "TrustScaler":
        norm_dists = np.asarray(norm_dists, dtype=float)
        if norm_dists.ndim != 2 or norm_dists.shape[0] < 2:
            raise ValueError("trust statistics need at least two sub-patients")
        self._scaler.fit(norm_dists)
        self._constant = self._scaler.data_max_ == self._scaler.data_min_
        logger.debug(
            "Fitted trust statistics",
            extra={"n": norm_dists.shape[0], "constant_columns": int(self._constant.sum())},
        )
        return self

    def transform(self, norm_dists: np.ndarray) -> np.ndarray:
        if self._constant is None:
            raise RuntimeError("TrustScaler is not fitted")
        trust = self._scaler.transform(np.atleast_2d(np.asarray(norm_dists, dtype=float)))
        trust[:, self._constant] = 0.0
        return trust

    @property
    def mins(self) -> np.ndarray:
        return self._scaler.data_min_

    @property
    def maxs(self) -> np.ndarray:
        return self._scaler.data_max_

    @classmethod
    def from_bounds(cls, mins: Sequence[float], maxs: Sequence[float]) -> "TrustScaler":
        """Rebuild frozen statistics; fitting on the two bound rows reproduces them exactly."""
        return cls().fit(np.vstack([np.asarray(mins, float), np.asarray(maxs, float)]))


def normalize_trust(norm_dists: np.ndarray) -> Tuple[np.ndarray, TrustScaler]:
    """Fit min-max statistics on ``norm_dists`` (N x V) and return the scaled scores."""
    scaler = TrustScaler().fit(norm_dists)
    return scaler.transform(norm_dists), scaler
