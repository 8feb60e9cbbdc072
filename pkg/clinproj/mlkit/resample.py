"""
Class rebalancing: random undersampling of the majority plus SMOTE.

Schedule, for minority fraction f:
    m* = min(floor(n_maj * f / (1 - f)), multiplier * n_min)
    majority is undersampled to round(m* * (1 - f) / f)
    minority is SMOTE-upsampled to m* (or subsampled when it already exceeds m*)
"""

import logging
from dataclasses import dataclass

import numpy as np
from sklearn.neighbors import NearestNeighbors

from ..errors import ResamplingError, TrainingError

logger = logging.getLogger(__name__)


@dataclass
class ResampledSet:
    """
    Rebalanced training data.

    ``source[i]`` is the original row of a real sample and -1 for a
    synthetic one. Synthetic rows appear last, in the order of
    ``parent_a``, ``parent_b`` and ``lam``.
    """
    X: np.ndarray
    y: np.ndarray
    source: np.ndarray
    parent_a: np.ndarray
    parent_b: np.ndarray
    lam: np.ndarray

    @property
    def n_synthetic(self) -> int:
        return int(self.lam.size)


def interpolate(a: np.ndarray, b: np.ndarray, lam: float) -> np.ndarray:
    """SMOTE point on the segment between ``a`` and ``b``."""
    return lam * np.asarray(a, dtype=float) + (1.0 - lam) * np.asarray(b, dtype=float)


def smote(X_min: np.ndarray, n_new: int, k: int, rng: np.random.Generator):
    """``n_new`` synthetic minority points with their (a, b, lambda) provenance (local indices)."""
    nn = NearestNeighbors(n_neighbors=k + 1).fit(X_min)
    neighbours = nn.kneighbors(X_min, return_distance=False)[:, 1:]
    a = rng.integers(0, len(X_min), size=n_new)
    b = neighbours[a, rng.integers(0, k, size=n_new)]
    lam = rng.random(n_new)
    synthetic = lam[:, None] * X_min[a] + (1.0 - lam[:, None]) * X_min[b]
    return synthetic, a, b, lam


def resample(X: np.ndarray, y: np.ndarray, minority_frac: float = 0.25, smote_k: int = 5,
             multiplier: int = 3, seed: int = 0) -> ResampledSet:
    """Rebalance so the minority makes up ``minority_frac`` of the result."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if not 0.0 < minority_frac < 0.5:
        raise ValueError(f"minority_frac must be in (0, 0.5), got {minority_frac}")

    counts = np.bincount(y, minlength=2)
    if (counts == 0).any():
        raise TrainingError("resampling needs both classes")
    minority = int(np.argmin(counts))
    min_idx = np.flatnonzero(y == minority)
    maj_idx = np.flatnonzero(y != minority)
    n_min, n_maj = len(min_idx), len(maj_idx)
    if n_min <= smote_k:
        raise ResamplingError(
            f"minority class has {n_min} samples; use smote_k below {n_min}"
        )

    f = minority_frac
    m_star = max(1, min(int(np.floor(n_maj * f / (1.0 - f))), multiplier * n_min))
    n_keep_maj = min(n_maj, int(np.floor(m_star * (1.0 - f) / f + 0.5)))

    rng = np.random.default_rng(seed)
    maj_keep = np.sort(rng.choice(maj_idx, size=n_keep_maj, replace=False))

    if m_star <= n_min:
        min_keep = np.sort(rng.choice(min_idx, size=m_star, replace=False))
        synthetic = np.zeros((0, X.shape[1]))
        a = b = np.zeros(0, dtype=int)
        lam = np.zeros(0)
    else:
        min_keep = min_idx
        synthetic, a_local, b_local, lam = smote(X[min_idx], m_star - n_min, smote_k, rng)
        a, b = min_idx[a_local], min_idx[b_local]

    real = np.concatenate([maj_keep, min_keep])
    out = ResampledSet(
        X=np.vstack([X[real], synthetic]),
        y=np.concatenate([y[real], np.full(len(lam), minority)]),
        source=np.concatenate([real, np.full(len(lam), -1)]),
        parent_a=a,
        parent_b=b,
        lam=lam,
    )
    logger.info(
        "Resampled training set",
        extra={"minority_before": n_min, "majority_before": n_maj, "minority_after": m_star,
               "majority_after": n_keep_maj, "synthetic": out.n_synthetic},
    )
    return out
