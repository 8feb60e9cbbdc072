"""k-means clustering and elbow diagnostics."""

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List

import numpy as np
from sklearn.cluster import KMeans
from sklearn.metrics import pairwise_distances_argmin

logger = logging.getLogger(__name__)


@dataclass
class ClusterModel:
    """Fitted centers plus the fit-time assignments and mean squared error."""
    centers: np.ndarray
    mse: float
    labels: np.ndarray

    @property
    def k(self) -> int:
        return int(self.centers.shape[0])


def kmeans_fit(X: np.ndarray, k: int, restarts: int = 10, seed: int = 0) -> ClusterModel:
    """
    Lloyd's algorithm from k-means++ seeds, best of ``restarts`` runs.

    Runs until assignments stop changing, so the result is a fixed point:
    every point sits with its nearest center and every center is the mean
    of its points. Empty clusters are re-seeded at far points.
    """
    X = np.asarray(X, dtype=float)
    if k < 1 or len(X) < k:
        raise ValueError(f"need 1 <= k <= {len(X)}, got k={k}")
    km = KMeans(
        n_clusters=k,
        init="k-means++",
        n_init=restarts,
        algorithm="lloyd",
        max_iter=1000,
        tol=0.0,
        random_state=seed,
    ).fit(X)
    model = ClusterModel(centers=km.cluster_centers_, mse=float(km.inertia_) / len(X), labels=km.labels_)
    logger.debug(f"k-means fit k={k}", extra={"k": k, "mse": model.mse, "iterations": int(km.n_iter_)})
    return model


def kmeans_assign(model: ClusterModel, x: np.ndarray) -> np.ndarray:
    """Index of the nearest center for each row of ``x``."""
    return pairwise_distances_argmin(np.atleast_2d(np.asarray(x, dtype=float)), model.centers)


def cluster_diagnostics(X: np.ndarray, labels: np.ndarray, k_range: Iterable[int],
                        restarts: int = 10, seed: int = 0) -> List[Dict[str, float]]:
    """Per k: within-cluster MSE and the largest within-cluster positive fraction."""
    labels = np.asarray(labels, dtype=float)
    rows = []
    for k in k_range:
        model = kmeans_fit(X, k, restarts=restarts, seed=seed)
        concentration = max(
            float(labels[model.labels == c].mean()) for c in range(k) if (model.labels == c).any()
        )
        rows.append({"k": float(k), "mse": model.mse, "max_concentration": concentration})
    return rows
