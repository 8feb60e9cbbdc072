"""
Abstract artifact store.
"""

from abc import ABC, abstractmethod

from ..schemas import CorruptionMask, EvaluationReport, ModelArtifact, SubPatientBatch, TrustTable


class ArtifactStore(ABC):
    """Where a run's batches, models, reports and masks live."""

    # ========================================================================
    # Sub-patient batches
    # ========================================================================

    @abstractmethod
    def save_batch(self, batch: SubPatientBatch, name: str = "subpatients") -> None:
        """Save a sub-patient batch, with or without projections."""

    @abstractmethod
    def load_batch(self, name: str = "subpatients") -> SubPatientBatch:
        """Load a sub-patient batch."""

    @abstractmethod
    def save_trust(self, table: TrustTable, name: str = "trust") -> None:
        """Save trust scores for a batch."""

    @abstractmethod
    def load_trust(self, name: str = "trust") -> TrustTable:
        """Load trust scores."""

    # ========================================================================
    # Models and reports
    # ========================================================================

    @abstractmethod
    def save_model(self, model: ModelArtifact, name: str = "model") -> None:
        """Save a model artifact."""

    @abstractmethod
    def load_model(self, name: str = "model") -> ModelArtifact:
        """Load a model artifact."""

    @abstractmethod
    def save_report(self, report: EvaluationReport, name: str = "report") -> None:
        """Save an evaluation report."""

    @abstractmethod
    def load_report(self, name: str = "report") -> EvaluationReport:
        """Load an evaluation report."""

    # ========================================================================
    # Corruption ground truth
    # ========================================================================

    @abstractmethod
    def save_mask(self, mask: CorruptionMask, name: str = "corruption_mask") -> None:
        """Save a corruption mask."""

    @abstractmethod
    def load_mask(self, name: str = "corruption_mask") -> CorruptionMask:
        """Load a corruption mask."""
