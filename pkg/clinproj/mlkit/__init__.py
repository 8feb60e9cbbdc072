"""Cluster-then-predict training and evaluation."""

from .clustering import ClusterModel, cluster_diagnostics, kmeans_assign, kmeans_fit
from .detection import detection_histogram, time_to_detection
from .features import DEMOGRAPHIC_FEATURES, build_features, feature_names
from .gbt import Ensemble, GBTParams, gbt_train
from .importance import feature_importance
from .metrics import curves, evaluate, sofa_baseline, summarize_metrics
from .pipeline import PipelineModel, predict, train_pipeline
from .resample import ResampledSet, resample
from .split import patient_split
from .threshold import f_score, select_threshold

__all__ = [
    "ClusterModel",
    "DEMOGRAPHIC_FEATURES",
    "Ensemble",
    "GBTParams",
    "PipelineModel",
    "ResampledSet",
    "build_features",
    "cluster_diagnostics",
    "curves",
    "detection_histogram",
    "evaluate",
    "f_score",
    "feature_importance",
    "feature_names",
    "gbt_train",
    "kmeans_assign",
    "kmeans_fit",
    "patient_split",
    "predict",
    "resample",
    "select_threshold",
    "sofa_baseline",
    "summarize_metrics",
    "time_to_detection",
]
