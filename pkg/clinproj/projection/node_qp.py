"""
Convex node subproblem: min ||x - d||^2 over a box and affine rows A x <= b.

Box-only problems are solved by clamping. Problems with affine rows go to
quadprog's dual active-set method; every answer is certified against the
KKT conditions, and an uncertified answer is polished on its active set
before giving up with :class:`~clinproj.errors.NodeQPError`.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import quadprog

from ..errors import NodeQPError

logger = logging.getLogger(__name__)

KKT_TOL = 1e-8


@dataclass(frozen=True)
class NodeSolution:
    """Minimizer, objective value and certified KKT residual."""
    x: np.ndarray
    objective: float
    residual: float


def solve_node_qp(
    d: np.ndarray,
    lower: np.ndarray,
    upper: np.ndarray,
    A: Optional[np.ndarray] = None,
    b: Optional[np.ndarray] = None,
    tol: float = KKT_TOL,
    polish_passes: int = 1,
) -> Optional[NodeSolution]:
    """
    Project ``d`` onto {lower <= x <= upper, A x <= b}.

    Returns None when the region is empty. Raises NodeQPError when the
    result cannot be certified within ``tol`` (scaled by max(1, |d|_inf))
    after ``polish_passes`` active-set refinements.
    """
    d = np.asarray(d, dtype=float)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    n = d.size
    A = np.zeros((0, n)) if A is None else np.asarray(A, dtype=float).reshape(-1, n)
    b = np.zeros(0) if b is None else np.asarray(b, dtype=float)
    scale = max(1.0, float(np.abs(d).max(initial=0.0)))

    if (lower > upper + tol * scale).any():
        return None
    upper = np.maximum(upper, lower)

    x = np.clip(d, lower, upper)
    if A.shape[0] == 0 or (A @ x <= b + tol * scale).all():
        return NodeSolution(x, float(np.sum((x - d) ** 2)), 0.0)

    # Fixed variables are substituted out; quadprog sees only the free ones.
    free = upper - lower > 1e-12
    if not free.any():
        return None
    fixed_x = x.copy()
    A_f = A[:, free]
    b_f = b - A[:, ~free] @ fixed_x[~free]
    live = np.abs(A_f).sum(axis=1) > 0
    if (b_f[~live] < -tol * scale).any():
        return None
    A_f, b_f = A_f[live], b_f[live]

    d_f, lo_f, hi_f = d[free], lower[free], upper[free]
    nf = d_f.size
    eye = np.eye(nf)
    C = np.hstack([-A_f.T, eye, -eye])
    c0 = np.concatenate([-b_f, lo_f, -hi_f])

    try:
        sol = quadprog.solve_qp(eye, d_f, C, c0, 0)
    except ValueError as e:
        if "inconsistent" in str(e):
            return None
        raise NodeQPError(f"quadprog failed: {e}", residual=float("inf")) from e
    x_f, lam = np.asarray(sol[0]), np.asarray(sol[4])

    residual = _kkt_residual(x_f, lam, d_f, C, c0)
    passes = 0
    while residual > tol * scale and passes < polish_passes:
        x_f, lam = _polish(x_f, lam, d_f, C, c0)
        residual = _kkt_residual(x_f, lam, d_f, C, c0)
        passes += 1
    if residual > tol * scale:
        raise NodeQPError("node QP not certified", residual=residual)

    x = fixed_x
    x[free] = x_f
    return NodeSolution(x, float(np.sum((x - d) ** 2)), residual)


def _kkt_residual(x: np.ndarray, lam: np.ndarray, d: np.ndarray, C: np.ndarray, c0: np.ndarray) -> float:
    """Largest violation among stationarity, primal, dual and complementarity."""
    slack = C.T @ x - c0
    stationarity = np.abs(x - d - C @ lam).max(initial=0.0)
    primal = max(0.0, -slack.min(initial=0.0))
    dual = max(0.0, -lam.min(initial=0.0))
    complementarity = np.abs(lam * slack).max(initial=0.0)
    return float(max(stationarity, primal, dual, complementarity))


def _polish(x: np.ndarray, lam: np.ndarray, d: np.ndarray, C: np.ndarray, c0: np.ndarray):
    """One primal-dual active-set step: solve the KKT system on the current active set."""
    slack = C.T @ x - c0
    active = np.flatnonzero((lam > 0) | (slack <= 1e-9))
    # Drop the most negative multiplier, add the most violated row.
    if lam.size and lam.min() < 0:
        active = active[active != int(np.argmin(lam))]
    if slack.size and slack.min() < 0:
        active = np.union1d(active, [int(np.argmin(slack))])

    n, k = x.size, active.size
    Ca = C[:, active]
    kkt = np.block([[np.eye(n), -Ca], [Ca.T, np.zeros((k, k))]])
    rhs = np.concatenate([d, c0[active]])
    solution = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
    x_new = solution[:n]
    lam_new = np.zeros_like(lam)
    lam_new[active] = solution[n:]
    logger.debug("Polished node QP", extra={"active": int(k)})
    return x_new, lam_new
