"""
JSON file store.

Every artifact is one pretty-printed JSON document named ``<name>.json``
under the store root. Content never includes timestamps, so identical runs
write identical bytes.
"""

import logging
from pathlib import Path
from typing import Type, TypeVar, Union

from pydantic import BaseModel, ValidationError

from ..errors import PSVFormatError
from ..schemas import (
    SCHEMA_VERSION,
    CorruptionMask,
    EvaluationReport,
    ModelArtifact,
    SubPatientBatch,
    TrustTable,
)
from .base import ArtifactStore

logger = logging.getLogger(__name__)

T = TypeVar("T", bound=BaseModel)


def save_json(model: BaseModel, path: Union[str, Path]) -> Path:
    """Write ``model`` as indented JSON."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(model.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.debug(f"Wrote {path}", extra={"path": str(path)})
    return path


def load_json(path: Union[str, Path], cls: Type[T]) -> T:
    """Read and validate a JSON artifact."""
    path = Path(path)
    if not path.exists():
        logger.error(f"Artifact not found: {path}")
        raise FileNotFoundError(f"Artifact not found: {path}")
    try:
        obj = cls.model_validate_json(path.read_text(encoding="utf-8"))
    except ValidationError as e:
        raise PSVFormatError(f"{path.name}: not a valid {cls.__name__}: {e}") from e
    version = getattr(obj, "schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise PSVFormatError(f"{path.name}: schema version {version}, expected {SCHEMA_VERSION}")
    return obj


class JSONStore(ArtifactStore):
    """Artifact store backed by a directory of JSON files."""

    def __init__(self, root: Union[str, Path]):
        """
        Initialize the store.

        Args:
            root: Directory holding the artifacts (created on first write)
        """
        self.root = Path(root)

    def path(self, name: str) -> Path:
        return self.root / f"{name}.json"

    def save_batch(self, batch: SubPatientBatch, name: str = "subpatients") -> None:
        save_json(batch, self.path(name))

    def load_batch(self, name: str = "subpatients") -> SubPatientBatch:
        return load_json(self.path(name), SubPatientBatch)

    def save_trust(self, table: TrustTable, name: str = "trust") -> None:
        save_json(table, self.path(name))

    def load_trust(self, name: str = "trust") -> TrustTable:
        return load_json(self.path(name), TrustTable)

    def save_model(self, model: ModelArtifact, name: str = "model") -> None:
        save_json(model, self.path(name))

    def load_model(self, name: str = "model") -> ModelArtifact:
        return load_json(self.path(name), ModelArtifact)

    def save_report(self, report: EvaluationReport, name: str = "report") -> None:
        save_json(report, self.path(name))

    def load_report(self, name: str = "report") -> EvaluationReport:
        return load_json(self.path(name), EvaluationReport)

    def save_mask(self, mask: CorruptionMask, name: str = "corruption_mask") -> None:
        save_json(mask, self.path(name))

    def load_mask(self, name: str = "corruption_mask") -> CorruptionMask:
        return load_json(self.path(name), CorruptionMask)
