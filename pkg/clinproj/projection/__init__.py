"""Physical projection (MIQP), normal projection and trust scores."""

from .branch_bound import BranchAndBound, SolverOptions
from .engine import ProjectionEngine, project_physical, summarize
from .feasibility import verify_feasibility
from .node_qp import NodeSolution, solve_node_qp
from .normal import TrustScaler, normal_projection, normalize_trust, project_normal
from .result import ProjectionResult, TrustScores

__all__ = [
    "BranchAndBound",
    "NodeSolution",
    "ProjectionEngine",
    "ProjectionResult",
    "SolverOptions",
    "TrustScaler",
    "TrustScores",
    "normal_projection",
    "normalize_trust",
    "project_normal",
    "project_physical",
    "solve_node_qp",
    "summarize",
    "verify_feasibility",
]
