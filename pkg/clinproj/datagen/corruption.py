"""Controlled corruption of feasible records, with a ground-truth mask."""

import logging
import zlib
from typing import List, Optional, Set, Tuple

import numpy as np

from ..constraints.builder import BASE_EXCESS_ZERO, HCO3_LOW
from ..constraints.registry import VitalRegistry, standard_registry
from ..preprocess.record import PatientRecord
from ..schemas import CorruptionCell, CorruptionKind, CorruptionMask, CorruptionSpec

logger = logging.getLogger(__name__)

# Range of the HCO3 value written by a logical-pair corruption.
LOGICAL_PAIR_HCO3 = (4.0, 9.0)


def _rng(spec: CorruptionSpec, patient_id: str) -> np.random.Generator:
    return np.random.default_rng([spec.seed, zlib.crc32(patient_id.encode("utf-8"))])


def _out_of_range(spec, rng: np.random.Generator, scale: Tuple[float, float]) -> float:
    delta = rng.uniform(*scale) * (spec.phys_hi - spec.phys_lo)
    below = spec.phys_lo - delta
    if rng.random() < 0.5 and not (spec.log and below <= -1.0):
        return float(below)
    return float(spec.phys_hi + delta)


def _spike(spec, value: float, rng: np.random.Generator, scale: Tuple[float, float]) -> float:
    jump = rng.uniform(*scale) * spec.rate
    if spec.log:
        # Multiplicative: the allowed log-step is measured at the normal midpoint.
        return float((value + 1.0) * (spec.norm_mid + 1.0 + jump) / (spec.norm_mid + 1.0) - 1.0)
    return float(value + jump if rng.random() < 0.5 else value - jump)


def corrupt(
    record: PatientRecord,
    spec: CorruptionSpec,
    registry: Optional[VitalRegistry] = None,
) -> Tuple[PatientRecord, CorruptionMask]:
    """
    Apply ``spec`` to a clean record.

    At most one corruption touches a cell. Logical-pair damage is drawn
    per hour first (HCO3 pushed below its threshold while base excess
    stays positive); then each remaining cell is tested for an
    out-of-range value, a rate spike and missingness, in that order.
    """
    registry = registry or standard_registry()
    rng = _rng(spec, record.patient_id)
    values = record.values.copy()
    cells: List[CorruptionCell] = []
    touched: Set[Tuple[int, int]] = set()

    def mark(v: int, t: int, kind: CorruptionKind, new: float) -> None:
        cells.append(CorruptionCell(
            patient_id=record.patient_id,
            vital=record.vitals[v],
            hour=t,
            kind=kind,
            original=float(record.values[v, t]),
            corrupted=None if np.isnan(new) else float(new),
        ))
        values[v, t] = new
        touched.add((v, t))

    if spec.logical_pair > 0 and "HCO3" in record.vitals and "BaseExcess" in record.vitals:
        h, be = record.vitals.index("HCO3"), record.vitals.index("BaseExcess")
        for t in range(record.hours):
            if rng.random() < spec.logical_pair and record.values[be, t] > BASE_EXCESS_ZERO:
                mark(h, t, CorruptionKind.LOGICAL_PAIR, min(rng.uniform(*LOGICAL_PAIR_HCO3), HCO3_LOW - 1.0))

    for v, name in enumerate(record.vitals):
        vital = registry.lookup(name)
        p_range = spec.probability(CorruptionKind.OUT_OF_RANGE, name)
        p_spike = spec.probability(CorruptionKind.RATE_SPIKE, name) if vital.rate else 0.0
        p_missing = spec.probability(CorruptionKind.MISSING, name)
        if p_range == p_spike == p_missing == 0.0:
            continue
        for t in range(record.hours):
            if (v, t) in touched:
                continue
            if rng.random() < p_range:
                mark(v, t, CorruptionKind.OUT_OF_RANGE, _out_of_range(vital, rng, spec.out_of_range_scale))
            elif t > 0 and rng.random() < p_spike:
                mark(v, t, CorruptionKind.RATE_SPIKE, _spike(vital, record.values[v, t - 1], rng, spec.spike_scale))
            elif rng.random() < p_missing:
                mark(v, t, CorruptionKind.MISSING, np.nan)

    if cells:
        logger.debug(
            f"Corrupted {len(cells)} cells of {record.patient_id}",
            extra={"patient_id": record.patient_id, "cells": len(cells)},
        )
    return record.with_values(values), CorruptionMask(cells=cells)
