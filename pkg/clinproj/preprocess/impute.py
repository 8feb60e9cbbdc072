"""Missing-value imputation."""

import logging

import numpy as np
import pandas as pd

from ..constraints.registry import VitalRegistry
from .record import PatientRecord

logger = logging.getLogger(__name__)

# Vitals carried forward rather than interpolated, with their pre-observation default.
FORWARD_FILL_DEFAULTS = {"FiO2": 21.0}


def impute(record: PatientRecord, registry: VitalRegistry) -> PatientRecord:
    """
    Fill every missing cell.

    Interior gaps are linearly interpolated (forward-filled for FiO2),
    trailing gaps carry the last observation forward, and leading or
    all-missing stretches take the vital's default: the normal-range
    midpoint, or 21 for FiO2.
    """
    filled = np.empty_like(record.values)
    for v, spec in enumerate(registry):
        series = pd.Series(record.values[v])
        if spec.name in FORWARD_FILL_DEFAULTS:
            series = series.ffill().fillna(FORWARD_FILL_DEFAULTS[spec.name])
        else:
            series = (
                series.interpolate(method="linear", limit_area="inside")
                .ffill()
                .fillna(spec.norm_mid)
            )
        filled[v] = series.to_numpy(dtype=float)

    n_missing = int(np.isnan(record.values).sum())
    logger.debug(
        f"Imputed {n_missing} cells for {record.patient_id}",
        extra={"patient_id": record.patient_id, "missing": n_missing},
    )
    return record.with_values(filled)
