"""Patient-level train/test split."""

import logging
from typing import List, Sequence, Tuple

import numpy as np

from ..errors import TrainingError

logger = logging.getLogger(__name__)


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def patient_split(subpatients: Sequence, ratio: float = 0.75, seed: int = 0) -> Tuple[List, List]:
    """
    Split sub-patients by patient id, septic and non-septic patients separately.

    A patient is septic when any of its sub-patients is labeled 1. Each class
    contributes round(ratio * count) patients to train.
    """
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"ratio must be in (0, 1), got {ratio}")

    septic = {}
    for sp in subpatients:
        septic[sp.patient_id] = septic.get(sp.patient_id, False) or bool(sp.label)

    rng = np.random.default_rng(seed)
    train_ids = set()
    for flag in (True, False):
        ids = sorted(pid for pid, s in septic.items() if s is flag)
        if len(ids) < 2:
            kind = "septic" if flag else "non-septic"
            raise TrainingError(f"need at least 2 {kind} patients to split, got {len(ids)}")
        order = rng.permutation(len(ids))
        n_train = _round_half_up(ratio * len(ids))
        train_ids.update(ids[i] for i in order[:n_train])

    train = [sp for sp in subpatients if sp.patient_id in train_ids]
    test = [sp for sp in subpatients if sp.patient_id not in train_ids]
    logger.info(
        "Split patients",
        extra={"train_patients": len(train_ids), "test_patients": len(septic) - len(train_ids),
               "train_windows": len(train), "test_windows": len(test)},
    )
    return train, test
