"""
Gradient-boosted regression trees for binary classification.

Logistic loss, second-order leaf weights and exact greedy split search over
presorted feature columns.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..errors import TrainingError
from ..schemas import EnsemblePayload, TreeNode

logger = logging.getLogger(__name__)

_EPS = 1e-12


@dataclass(frozen=True)
class GBTParams:
    """Boosting hyperparameters."""
    max_depth: int = 4
    n_rounds: int = 200
    learning_rate: float = 0.1
    min_child_weight: float = 1.0
    reg_lambda: float = 1.0
    gamma: float = 0.0


def sigmoid(margin: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(margin, -35.0, 35.0)))


def logit(p: float) -> float:
    p = min(max(p, _EPS), 1.0 - _EPS)
    return float(np.log(p / (1.0 - p)))


def logistic_loss(margin: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Per-sample negative log-likelihood as a function of the margin."""
    return np.logaddexp(0.0, margin) - y * margin


def logistic_grad_hess(margin: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """First and second derivative of the logistic loss in the margin."""
    p = sigmoid(margin)
    return p - y, p * (1.0 - p)


class Ensemble:
    """Additive tree model; ``constant`` short-circuits to a fixed probability."""

    def __init__(self, base_score: float, learning_rate: float, n_features: int,
                 constant: Optional[float] = None):
        self.base_score = base_score
        self.learning_rate = learning_rate
        self.trees: list = []
        self.split_counts = np.zeros(n_features, dtype=int)
        self.gain = np.zeros(n_features)
        self.constant = constant

    @classmethod
    def constant_model(cls, probability: float, n_features: int) -> "Ensemble":
        return cls(logit(probability), 0.0, n_features, constant=float(probability))

    def margin(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.full(len(X), self.base_score)
        for tree in self.trees:
            _accumulate(tree, X, np.arange(len(X)), out)
        return out

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        if self.constant is not None:
            return np.full(len(np.atleast_2d(X)), self.constant)
        return sigmoid(self.margin(X))

    def to_payload(self) -> EnsemblePayload:
        return EnsemblePayload(
            base_score=self.base_score,
            learning_rate=self.learning_rate,
            trees=self.trees,
            split_counts=self.split_counts.tolist(),
            gain=self.gain.tolist(),
            constant=self.constant,
        )

    @classmethod
    def from_payload(cls, payload: EnsemblePayload, n_features: int) -> "Ensemble":
        model = cls(payload.base_score, payload.learning_rate, n_features, payload.constant)
        model.trees = list(payload.trees)
        if payload.split_counts:
            model.split_counts = np.asarray(payload.split_counts, dtype=int)
            model.gain = np.asarray(payload.gain, dtype=float)
        return model


def _accumulate(node: TreeNode, X: np.ndarray, rows: np.ndarray, out: np.ndarray) -> None:
    if node.is_leaf:
        out[rows] += node.value
        return
    go_left = X[rows, node.feature] < node.threshold
    _accumulate(node.left, X, rows[go_left], out)
    _accumulate(node.right, X, rows[~go_left], out)


class _TreeBuilder:
    """Exact greedy tree growth on presorted columns."""

    def __init__(self, X: np.ndarray, params: GBTParams, ensemble: Ensemble):
        self.X = X
        self.params = params
        self.ensemble = ensemble
        self.order_t = np.argsort(X, axis=0, kind="stable").T
        self.columns = np.arange(X.shape[1])[:, None]

    def build(self, g: np.ndarray, h: np.ndarray) -> TreeNode:
        self.g, self.h = g, h
        return self._grow(np.ones(len(self.X), dtype=bool), 0)

    def _leaf(self, G: float, H: float, cover: float) -> TreeNode:
        weight = -G / (H + self.params.reg_lambda)
        return TreeNode(value=self.params.learning_rate * weight, cover=cover)

    def _grow(self, mask: np.ndarray, depth: int) -> TreeNode:
        p = self.params
        k = int(mask.sum())
        G, H = float(self.g[mask].sum()), float(self.h[mask].sum())
        if depth >= p.max_depth or k < 2:
            return self._leaf(G, H, H)

        rows = self.order_t[mask[self.order_t]].reshape(self.X.shape[1], k)
        xs = self.X[rows, self.columns]
        GL = np.cumsum(self.g[rows], axis=1)[:, :-1]
        HL = np.cumsum(self.h[rows], axis=1)[:, :-1]
        GR, HR = G - GL, H - HL
        lam = p.reg_lambda
        gain = 0.5 * (GL ** 2 / (HL + lam) + GR ** 2 / (HR + lam) - G ** 2 / (H + lam)) - p.gamma
        valid = (xs[:, 1:] > xs[:, :-1]) & (HL >= p.min_child_weight) & (HR >= p.min_child_weight)
        gain = np.where(valid, gain, -np.inf)

        best = int(np.argmax(gain))
        feature, pos = divmod(best, k - 1)
        best_gain = float(gain[feature, pos])
        if not np.isfinite(best_gain) or best_gain <= 0.0:
            return self._leaf(G, H, H)

        threshold = 0.5 * (xs[feature, pos] + xs[feature, pos + 1])
        left = mask & (self.X[:, feature] < threshold)
        right = mask & ~left
        self.ensemble.split_counts[feature] += 1
        self.ensemble.gain[feature] += best_gain
        return TreeNode(
            feature=feature,
            threshold=float(threshold),
            gain=best_gain,
            cover=H,
            left=self._grow(left, depth + 1),
            right=self._grow(right, depth + 1),
        )


def gbt_train(X: np.ndarray, y: np.ndarray, params: Optional[GBTParams] = None) -> Ensemble:
    """Fit a boosted ensemble to binary labels."""
    params = params or GBTParams()
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError("X must be 2-D with one row per label")
    if not np.isin(y, (0.0, 1.0)).all():
        raise TrainingError("labels must be binary")
    if y.min() == y.max():
        raise TrainingError("gradient boosting needs both classes")

    ensemble = Ensemble(logit(float(y.mean())), params.learning_rate, X.shape[1])
    builder = _TreeBuilder(X, params, ensemble)
    margin = np.full(len(X), ensemble.base_score)
    for _ in range(params.n_rounds):
        g, h = logistic_grad_hess(margin, y)
        tree = builder.build(g, h)
        ensemble.trees.append(tree)
        _accumulate(tree, X, np.arange(len(X)), margin)

    logger.debug(
        "Trained boosted ensemble",
        extra={"rounds": params.n_rounds, "n": len(X), "splits": int(ensemble.split_counts.sum())},
    )
    return ensemble
