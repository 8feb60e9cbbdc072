"""
Cluster-then-predict model.

Training: resample -> standardise -> k-means -> one boosted ensemble and
one f-score threshold per cluster. Prediction routes each feature vector
through the same standardisation and nearest-center assignment.
"""

import hashlib
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from sklearn.preprocessing import StandardScaler

from ..projection.normal import TrustScaler
from ..schemas import ClusterModelPayload, ModelArtifact, RunManifest
from .clustering import ClusterModel, kmeans_assign, kmeans_fit
from .gbt import Ensemble, GBTParams, gbt_train
from .resample import ResampledSet, resample
from .threshold import select_threshold

logger = logging.getLogger(__name__)

FALLBACK_THRESHOLD = 0.5


@dataclass
class ClusterClassifier:
    """Ensemble and decision threshold for one cluster."""
    ensemble: Ensemble
    threshold: float
    n_train: int
    n_positive: int
    fallback: bool = False


@dataclass
class PipelineModel:
    """Fitted cluster-then-predict model with its frozen preprocessing statistics."""
    feature_names: List[str]
    window: int
    registry_hash: str
    use_trust: bool
    trust_scaler: Optional[TrustScaler]
    scaler_mean: np.ndarray
    scaler_scale: np.ndarray
    clusters: ClusterModel
    classifiers: List[ClusterClassifier]
    manifest: RunManifest
    train_patient_ids: List[str] = field(default_factory=list)
    test_patient_ids: List[str] = field(default_factory=list)

    @property
    def k(self) -> int:
        return self.clusters.k

    def standardize(self, X: np.ndarray) -> np.ndarray:
        return (np.atleast_2d(np.asarray(X, dtype=float)) - self.scaler_mean) / self.scaler_scale

    def assign(self, X: np.ndarray) -> np.ndarray:
        return kmeans_assign(self.clusters, self.standardize(X))

    def predict_proba(self, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Probabilities and cluster ids for each row of ``X``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        assigned = self.assign(X)
        probs = np.zeros(len(X))
        for c in np.unique(assigned):
            rows = assigned == c
            probs[rows] = self.classifiers[c].ensemble.predict_proba(X[rows])
        return probs, assigned

    def predict_batch(self, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(probabilities, labels, clusters), each thresholded by its own cluster."""
        probs, assigned = self.predict_proba(X)
        thresholds = np.array([self.classifiers[c].threshold for c in assigned])
        return probs, (probs >= thresholds).astype(int), assigned

    # ------------------------------------------------------------ artifacts

    def to_artifact(self) -> ModelArtifact:
        return ModelArtifact(
            registry_hash=self.registry_hash,
            window=self.window,
            use_trust=self.use_trust,
            feature_names=self.feature_names,
            trust_min=self.trust_scaler.mins.tolist() if self.trust_scaler else None,
            trust_max=self.trust_scaler.maxs.tolist() if self.trust_scaler else None,
            scaler_mean=self.scaler_mean.tolist(),
            scaler_scale=self.scaler_scale.tolist(),
            centers=self.clusters.centers.tolist(),
            clusters=[
                ClusterModelPayload(
                    cluster=c,
                    ensemble=clf.ensemble.to_payload(),
                    threshold=clf.threshold,
                    n_train=clf.n_train,
                    n_positive=clf.n_positive,
                    fallback=clf.fallback,
                )
                for c, clf in enumerate(self.classifiers)
            ],
            train_patient_ids=self.train_patient_ids,
            test_patient_ids=self.test_patient_ids,
            manifest=self.manifest,
        )

    @classmethod
    def from_artifact(cls, artifact: ModelArtifact) -> "PipelineModel":
        n_features = len(artifact.feature_names)
        trust = None
        if artifact.use_trust and artifact.trust_min is not None:
            trust = TrustScaler.from_bounds(artifact.trust_min, artifact.trust_max)
        return cls(
            feature_names=list(artifact.feature_names),
            window=artifact.window,
            registry_hash=artifact.registry_hash,
            use_trust=artifact.use_trust,
            trust_scaler=trust,
            scaler_mean=np.asarray(artifact.scaler_mean),
            scaler_scale=np.asarray(artifact.scaler_scale),
            clusters=ClusterModel(np.asarray(artifact.centers), float("nan"), np.zeros(0, dtype=int)),
            classifiers=[
                ClusterClassifier(
                    ensemble=Ensemble.from_payload(p.ensemble, n_features),
                    threshold=p.threshold,
                    n_train=p.n_train,
                    n_positive=p.n_positive,
                    fallback=p.fallback,
                )
                for p in artifact.clusters
            ],
            manifest=artifact.manifest,
            train_patient_ids=list(artifact.train_patient_ids),
            test_patient_ids=list(artifact.test_patient_ids),
        )

    def manifest_hash(self) -> str:
        return hashlib.sha256(self.to_artifact().model_dump_json().encode("utf-8")).hexdigest()


def train_pipeline(
    X: np.ndarray,
    y: np.ndarray,
    feature_names: Sequence[str],
    k: int,
    params: GBTParams,
    seed: int,
    manifest: RunManifest,
    *,
    window: int,
    registry_hash: str,
    trust_scaler: Optional[TrustScaler] = None,
    minority_frac: float = 0.25,
    smote_k: int = 5,
    smote_multiplier: int = 3,
    kmeans_restarts: int = 10,
    threshold_step: float = 0.01,
) -> PipelineModel:
    """Fit the full cluster-then-predict model on training features."""
    data: ResampledSet = resample(
        X, y, minority_frac=minority_frac, smote_k=smote_k, multiplier=smote_multiplier, seed=seed
    )
    scaler = StandardScaler().fit(data.X)
    clusters = kmeans_fit(scaler.transform(data.X), k, restarts=kmeans_restarts, seed=seed)
    majority = int(np.bincount(data.y, minlength=2).argmax())

    classifiers = []
    for c in range(k):
        rows = clusters.labels == c
        Xc, yc = data.X[rows], data.y[rows]
        n_pos = int(yc.sum())
        if n_pos == 0 or n_pos == len(yc):
            # An empty cluster has no class of its own and takes the training majority.
            only = (1 if n_pos else 0) if len(yc) else majority
            logger.warning(
                f"Cluster {c} has a single class ({only}); using a constant model",
                extra={"cluster": c, "n": int(len(yc)), "positives": n_pos, "class": only},
            )
            classifiers.append(ClusterClassifier(
                ensemble=Ensemble.constant_model(float(only), X.shape[1]),
                threshold=FALLBACK_THRESHOLD,
                n_train=int(len(yc)),
                n_positive=n_pos,
                fallback=True,
            ))
            continue
        ensemble = gbt_train(Xc, yc, params)
        threshold = select_threshold(ensemble.predict_proba(Xc), yc, threshold_step)
        classifiers.append(ClusterClassifier(ensemble, threshold, int(len(yc)), n_pos))

    logger.info(
        "Trained cluster-then-predict model",
        extra={"k": k, "fallback_clusters": sum(c.fallback for c in classifiers),
               "train_rows": int(len(data.y))},
    )
    return PipelineModel(
        feature_names=list(feature_names),
        window=window,
        registry_hash=registry_hash,
        use_trust=trust_scaler is not None,
        trust_scaler=trust_scaler,
        scaler_mean=scaler.mean_,
        scaler_scale=scaler.scale_,
        clusters=clusters,
        classifiers=classifiers,
        manifest=manifest,
    )


def predict(model: PipelineModel, feature_vector: np.ndarray) -> Tuple[float, int]:
    """Probability and thresholded label for one feature vector."""
    probs, labels, _ = model.predict_batch(np.atleast_2d(feature_vector))
    return float(probs[0]), int(labels[0])
