"""
Pydantic schemas for clinproj.

Configuration records are validated on load; persisted artifacts (sub-patient
batches, model files, reports) round-trip through ``model_dump_json``. Nothing
persisted carries a timestamp so identical runs produce identical files.
"""

from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator

SCHEMA_VERSION = 1


class Gender(str, Enum):
    """Patient gender as carried in the record header."""
    M = "M"
    F = "F"


class SolveStatus(str, Enum):
    """Outcome of one window projection."""
    OPTIMAL = "optimal"
    NODE_LIMIT = "node_limit"
    INFEASIBLE = "infeasible"


class CorruptionKind(str, Enum):
    """Kinds of synthetic damage applied by the corruption model."""
    OUT_OF_RANGE = "out_of_range"
    RATE_SPIKE = "rate_spike"
    LOGICAL_PAIR = "logical_pair"
    MISSING = "missing"


# ============================================================================
# Configuration Records
# ============================================================================

class VitalSpec(BaseModel):
    """Physical and normal range of one modeled vital, in raw units."""
    model_config = {"frozen": True}

    name: str = Field(..., description="Registry identifier, e.g. HeartRate")
    column: str = Field(..., description="PSV column name, e.g. HR")
    phys_lo: float
    phys_hi: float
    norm_lo: float
    norm_hi: float
    rate: Optional[float] = Field(default=None, description="Max hourly change, raw units")
    log: bool = Field(default=False, description="Apply log10(x+1) before scaling")

    @field_validator("name", "column")
    @classmethod
    def strip_name(cls, v: str) -> str:
        v = v.strip()
        if not v:
            raise ValueError("name must be non-empty")
        return v

    @model_validator(mode="after")
    def check_ranges(self) -> "VitalSpec":
        if not self.phys_lo < self.phys_hi:
            raise ValueError(f"phys_lo {self.phys_lo} must be below phys_hi {self.phys_hi}")
        if not self.norm_lo < self.norm_hi:
            raise ValueError(f"norm_lo {self.norm_lo} must be below norm_hi {self.norm_hi}")
        if self.rate is not None and self.rate <= 0:
            raise ValueError(f"rate must be positive, got {self.rate}")
        if self.log and min(self.phys_lo, self.norm_lo) <= -1:
            raise ValueError("logged vital needs ranges above -1")
        return self

    @property
    def norm_mid(self) -> float:
        return (self.norm_lo + self.norm_hi) / 2.0


class CorruptionSpec(BaseModel):
    """
    Per-vital corruption probabilities (per cell).

    Keys are registry names; the key ``"*"`` applies to every vital without
    an explicit entry. ``logical_pair`` is a per-hour probability of breaking
    the HCO3/BaseExcess implication.
    """
    out_of_range: Dict[str, float] = Field(default_factory=dict)
    rate_spike: Dict[str, float] = Field(default_factory=dict)
    missing: Dict[str, float] = Field(default_factory=dict)
    logical_pair: float = Field(default=0.0, ge=0.0, le=1.0)
    out_of_range_scale: Tuple[float, float] = (0.05, 0.5)
    spike_scale: Tuple[float, float] = (1.5, 3.0)
    seed: int = 0

    @field_validator("out_of_range", "rate_spike", "missing")
    @classmethod
    def check_probabilities(cls, v: Dict[str, float]) -> Dict[str, float]:
        for key, p in v.items():
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"probability for {key} must be in [0, 1], got {p}")
        return v

    def probability(self, kind: CorruptionKind, vital: str) -> float:
        table = {
            CorruptionKind.OUT_OF_RANGE: self.out_of_range,
            CorruptionKind.RATE_SPIKE: self.rate_spike,
            CorruptionKind.MISSING: self.missing,
        }[kind]
        return table.get(vital, table.get("*", 0.0))


class CorruptionCell(BaseModel):
    """One altered or blanked cell, with its ground-truth value."""
    patient_id: str
    vital: str
    hour: int
    kind: CorruptionKind
    original: float
    corrupted: Optional[float] = None


class CorruptionMask(BaseModel):
    """Ground truth for a corrupted cohort."""
    cells: List[CorruptionCell] = Field(default_factory=list)


# ============================================================================
# Sub-patient and Projection Artifacts
# ============================================================================

class SubPatientPayload(BaseModel):
    """Serialised sub-patient; ``data`` is vitals x hours in solve-space."""
    sub_id: str
    patient_id: str
    window_start: int
    data: List[List[float]]
    age: float
    gender: Gender
    sofa: int
    sirs: int
    label: int = Field(..., ge=0, le=1)


class ProjectionPayload(BaseModel):
    """Serialised projection result for one window."""
    corrected: List[List[float]]
    phys_dist: List[float]
    binaries: List[int]
    status: SolveStatus
    nodes_explored: int
    objective: float


class SubPatientBatch(BaseModel):
    """A run's worth of sub-patients, optionally with their projections."""
    schema_version: int = SCHEMA_VERSION
    registry_hash: str
    vitals: List[str]
    window: int
    stride: int
    subpatients: List[SubPatientPayload]
    projections: Optional[List[ProjectionPayload]] = None

    @model_validator(mode="after")
    def check_alignment(self) -> "SubPatientBatch":
        if self.projections is not None and len(self.projections) != len(self.subpatients):
            raise ValueError("projections must align one-to-one with subpatients")
        return self


class TrustTable(BaseModel):
    """Normal-set distances and trust scores for a batch, with the frozen min-max statistics."""
    schema_version: int = SCHEMA_VERSION
    registry_hash: str
    vitals: List[str]
    sub_ids: List[str]
    norm_dist: List[List[float]]
    trust: List[List[float]]
    trust_min: List[float]
    trust_max: List[float]
    train_patient_ids: List[str]


# ============================================================================
# Model Artifact
# ============================================================================

class TreeNode(BaseModel):
    """Regression tree node: a split when ``feature`` is set, else a leaf."""
    feature: Optional[int] = None
    threshold: Optional[float] = None
    gain: float = 0.0
    cover: float = 0.0
    value: float = 0.0
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


TreeNode.model_rebuild()


class EnsemblePayload(BaseModel):
    """Boosted ensemble, or a constant model when ``constant`` is set."""
    base_score: float = 0.0
    learning_rate: float = 0.1
    trees: List[TreeNode] = Field(default_factory=list)
    split_counts: List[int] = Field(default_factory=list)
    gain: List[float] = Field(default_factory=list)
    constant: Optional[float] = None


class ClusterModelPayload(BaseModel):
    """Per-cluster classifier and decision threshold."""
    cluster: int
    ensemble: EnsemblePayload
    threshold: float = Field(..., gt=0.0, lt=1.0)
    n_train: int
    n_positive: int
    fallback: bool = False


class RunManifest(BaseModel):
    """Everything needed to reproduce a run."""
    command: str
    config_hash: str
    seed: int
    versions: Dict[str, str] = Field(default_factory=dict)
    hyperparams: Dict[str, float] = Field(default_factory=dict)
    k: Optional[int] = None


class ModelArtifact(BaseModel):
    """Versioned cluster-then-predict model."""
    schema_version: int = SCHEMA_VERSION
    registry_hash: str
    window: int
    use_trust: bool
    feature_names: List[str]
    trust_min: Optional[List[float]] = None
    trust_max: Optional[List[float]] = None
    scaler_mean: List[float]
    scaler_scale: List[float]
    centers: List[List[float]]
    clusters: List[ClusterModelPayload]
    train_patient_ids: List[str] = Field(default_factory=list)
    test_patient_ids: List[str] = Field(default_factory=list)
    manifest: RunManifest

    @model_validator(mode="after")
    def check_clusters(self) -> "ModelArtifact":
        if len(self.clusters) != len(self.centers):
            raise ValueError("need exactly one cluster model per center")
        dim = len(self.feature_names)
        if any(len(c) != dim for c in self.centers):
            raise ValueError("center dimension must equal feature dimension")
        return self


# ============================================================================
# Evaluation Reports
# ============================================================================

class Metrics(BaseModel):
    """Confusion counts and the derived rates reported per evaluation."""
    tp: int
    fp: int
    tn: int
    fn: int
    sensitivity: float
    specificity: float
    precision: float
    f_score: float
    auroc: Optional[float] = None
    auprc: Optional[float] = None


class CurvePoints(BaseModel):
    """(x, y) pairs for external plotting."""
    x: List[float]
    y: List[float]


class MetricsSummary(BaseModel):
    """Mean and population standard deviation over repeated splits."""
    iterations: int
    mean: Dict[str, float]
    std: Dict[str, float]


class EvaluationReport(BaseModel):
    """Consolidated, machine-readable evaluation output."""
    schema_version: int = SCHEMA_VERSION
    manifest: RunManifest
    rows: Dict[str, Metrics] = Field(default_factory=dict)
    curves: Dict[str, Dict[str, CurvePoints]] = Field(default_factory=dict)
    summaries: Dict[str, MetricsSummary] = Field(default_factory=dict)
    projection: Dict[str, Any] = Field(default_factory=dict)
    importance: List[Tuple[str, float]] = Field(default_factory=list)
    detection: Dict[str, Any] = Field(default_factory=dict)
    diagnostics: List[Dict[str, float]] = Field(default_factory=list)
