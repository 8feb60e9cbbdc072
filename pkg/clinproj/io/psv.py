"""
Pipe-separated patient files.

One file per patient, one row per hour, header of column names, ``NaN`` for
missing. The patient id is the file stem. Columns the registry does not model
are ignored on read.
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from ..constraints.registry import AGE_COLUMN, GENDER_COLUMN, LABEL_COLUMN, VitalRegistry
from ..errors import PSVFormatError
from ..preprocess.record import PatientRecord
from ..preprocess.transform import inverse_matrix
from ..schemas import Gender

logger = logging.getLogger(__name__)

PSV_SEP = "|"
NA_REP = "NaN"
PHYSDIST_SUFFIX = "_physdist"

_GENDER_CODES = {1: Gender.M, 0: Gender.F}


def psv_files(directory: Union[str, Path]) -> List[Path]:
    """Sorted ``*.psv`` paths under ``directory``."""
    directory = Path(directory)
    if not directory.is_dir():
        logger.error(f"Input directory not found: {directory}")
        raise FileNotFoundError(f"Input directory not found: {directory}")
    return sorted(directory.glob("*.psv"))


def read_psv(path: Union[str, Path], registry: VitalRegistry) -> PatientRecord:
    """Parse one patient file into a raw-unit record."""
    path = Path(path)
    try:
        frame = pd.read_csv(path, sep=PSV_SEP, na_values=[NA_REP])
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise PSVFormatError(f"{path.name}: {e}") from e

    missing = [c for c in (AGE_COLUMN, GENDER_COLUMN, LABEL_COLUMN) if c not in frame.columns]
    if missing:
        raise PSVFormatError(f"{path.name}: missing columns {missing}")
    if frame.empty:
        raise PSVFormatError(f"{path.name}: no rows")

    values = np.full((len(registry), len(frame)), np.nan)
    for v, spec in enumerate(registry):
        if spec.column in frame.columns:
            values[v] = pd.to_numeric(frame[spec.column], errors="coerce").to_numpy(dtype=float)

    try:
        gender = _GENDER_CODES[int(frame[GENDER_COLUMN].iloc[0])]
        age = float(frame[AGE_COLUMN].iloc[0])
        labels = frame[LABEL_COLUMN].fillna(0).astype(int).to_numpy()
    except (KeyError, ValueError, TypeError) as e:
        raise PSVFormatError(f"{path.name}: bad header fields: {e}") from e

    try:
        return PatientRecord(
            patient_id=path.stem,
            age=age,
            gender=gender,
            vitals=tuple(registry.names),
            values=values,
            labels=labels,
        )
    except ValueError as e:
        raise PSVFormatError(str(e)) from e


def _frame(registry: VitalRegistry, values: np.ndarray, age: float, gender: Gender,
           labels: Sequence[int]) -> pd.DataFrame:
    frame = pd.DataFrame({spec.column: values[v] for v, spec in enumerate(registry)})
    frame[AGE_COLUMN] = age
    frame[GENDER_COLUMN] = 1 if Gender(gender) is Gender.M else 0
    frame[LABEL_COLUMN] = np.asarray(labels, dtype=int)
    return frame


def write_psv(record: PatientRecord, directory: Union[str, Path], registry: VitalRegistry) -> Path:
    """Write ``record`` as ``<patient_id>.psv``; the label column comes last."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{record.patient_id}.psv"
    frame = _frame(registry, record.values, record.age, record.gender, record.labels)
    frame.to_csv(path, sep=PSV_SEP, na_rep=NA_REP, index=False)
    return path


def write_corrected(
    directory: Union[str, Path],
    registry: VitalRegistry,
    subpatient,
    corrected: np.ndarray,
    phys_dist: np.ndarray,
    trust: Optional[np.ndarray] = None,
) -> Path:
    """
    Export one corrected window in raw units.

    Same columns as the input format, followed by per-vital trust and
    physical-distance columns that repeat on every row.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    raw = inverse_matrix(registry, corrected)
    hours = raw.shape[1]
    frame = _frame(registry, raw, subpatient.age, subpatient.gender, [subpatient.label] * hours)
    extra: Dict[str, np.ndarray] = {}
    if trust is not None:
        extra.update({f"{spec.column}_trust": np.full(hours, trust[v]) for v, spec in enumerate(registry)})
    extra.update({f"{spec.column}{PHYSDIST_SUFFIX}": np.full(hours, phys_dist[v]) for v, spec in enumerate(registry)})
    frame = pd.concat([frame, pd.DataFrame(extra)], axis=1)
    path = directory / f"{subpatient.patient_id}_{subpatient.window_start:04d}.psv"
    frame.to_csv(path, sep=PSV_SEP, na_rep=NA_REP, index=False)
    return path
