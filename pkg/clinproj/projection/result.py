"""Projection and trust-score results."""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..schemas import ProjectionPayload, SolveStatus


@dataclass
class ProjectionResult:
    """Corrected window and its per-vital squared distance to the input."""
    corrected: np.ndarray
    phys_dist: np.ndarray
    binaries: Tuple[int, ...]
    status: SolveStatus
    nodes_explored: int
    objective: float

    @classmethod
    def from_point(cls, d: np.ndarray, x: np.ndarray, binaries, status: SolveStatus,
                   nodes: int) -> "ProjectionResult":
        d = np.asarray(d, dtype=float)
        corrected = np.asarray(x, dtype=float).reshape(d.shape)
        phys_dist = ((d - corrected) ** 2).sum(axis=1)
        return cls(
            corrected=corrected,
            phys_dist=phys_dist,
            binaries=tuple(int(z) for z in binaries),
            status=SolveStatus(status),
            nodes_explored=int(nodes),
            objective=float(phys_dist.sum()),
        )

    def to_payload(self) -> ProjectionPayload:
        return ProjectionPayload(
            corrected=self.corrected.tolist(),
            phys_dist=self.phys_dist.tolist(),
            binaries=list(self.binaries),
            status=self.status,
            nodes_explored=self.nodes_explored,
            objective=self.objective,
        )

    @classmethod
    def from_payload(cls, payload: ProjectionPayload) -> "ProjectionResult":
        return cls(
            corrected=np.asarray(payload.corrected, dtype=float),
            phys_dist=np.asarray(payload.phys_dist, dtype=float),
            binaries=tuple(payload.binaries),
            status=payload.status,
            nodes_explored=payload.nodes_explored,
            objective=payload.objective,
        )


@dataclass
class TrustScores:
    """Raw normal-set distance per vital and its normalised trust score."""
    norm_dist: np.ndarray
    trust: np.ndarray
