"""Tests for thresholds, metrics, features, importance and detection timing."""

from types import SimpleNamespace
from unittest.mock import MagicMock

import numpy as np
import pytest

from clinproj.errors import TrainingError
from clinproj.mlkit import (
    build_features,
    curves,
    detection_histogram,
    evaluate,
    f_score,
    feature_importance,
    feature_names,
    select_threshold,
    sofa_baseline,
    summarize_metrics,
    time_to_detection,
)
from clinproj.mlkit.threshold import threshold_grid


class TestThreshold:
    """f-score threshold search."""

    def test_grid(self):
        grid = threshold_grid(0.01)
        assert len(grid) == 99
        assert grid[0] == 0.01 and grid[-1] == 0.99

    def test_lowest_perfect_threshold(self):
        """Anything in (0.4, 0.9] separates; 0.41 is the lowest grid point there."""
        assert select_threshold(np.array([0.1, 0.4, 0.9]), np.array([0, 0, 1])) == pytest.approx(0.41)

    def test_ties_take_lowest(self):
        assert select_threshold(np.array([0.5, 0.5]), np.array([1, 0])) == pytest.approx(0.01)

    def test_needs_a_positive(self):
        with pytest.raises(TrainingError):
            select_threshold(np.array([0.2, 0.3]), np.array([0, 0]))

    def test_probabilities_checked(self):
        with pytest.raises(ValueError):
            select_threshold(np.array([1.2]), np.array([1]))

    def test_f_score(self):
        assert f_score(0.0, 0.0) == 0.0
        assert f_score(0.5, 1.0) == pytest.approx(2 / 3)


class TestEvaluate:
    """Confusion counts and rates."""

    def test_counts_and_rates(self):
        m = evaluate([0.9, 0.8, 0.3, 0.2], [1, 0, 1, 0], threshold=0.5)
        assert (m.tp, m.fp, m.tn, m.fn) == (1, 1, 1, 1)
        assert m.sensitivity == m.specificity == m.precision == m.f_score == pytest.approx(0.5)
        assert m.auroc == pytest.approx(0.75)

    @pytest.mark.parametrize("seed, n", [(0, 40), (1, 257), (2, 500)])
    def test_auroc_matches_pair_counting(self, seed, n):
        """AUROC is the share of (positive, negative) pairs ranked correctly, ties counting half."""
        rng = np.random.default_rng(seed)
        labels = rng.integers(0, 2, size=n)
        labels[:2] = [0, 1]
        scores = np.round(rng.random(n) + 0.3 * labels, 2)
        pos, neg = scores[labels == 1], scores[labels == 0]
        wins = (pos[:, None] > neg[None, :]).sum() + 0.5 * (pos[:, None] == neg[None, :]).sum()
        m = evaluate(scores, labels)
        assert m.auroc == pytest.approx(wins / (len(pos) * len(neg)), abs=1e-12)

    def test_explicit_predictions(self):
        m = evaluate([0.1, 0.2], [1, 0], predicted=[1, 0])
        assert m.tp == 1 and m.tn == 1

    def test_single_class_omits_ranking(self):
        m = evaluate([0.1, 0.9], [0, 0])
        assert m.auroc is None and m.auprc is None
        assert m.sensitivity == 0.0

    def test_sofa_baseline(self):
        """SOFA >= 2 predicts sepsis."""
        subs = [SimpleNamespace(sofa=s, label=l) for s, l in [(0, 0), (1, 0), (2, 1), (3, 1), (2, 0)]]
        m = sofa_baseline(subs)
        assert (m.tp, m.fp, m.tn, m.fn) == (2, 1, 2, 0)

    def test_curves(self):
        out = curves([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1])
        assert set(out) == {"roc", "pr"}
        assert out["roc"].x[0] == 0.0 and out["roc"].y[-1] == 1.0
        assert curves([0.1, 0.2], [1, 1]) == {}

    def test_summarize(self):
        runs = [evaluate([0.9, 0.1], [1, 0]), evaluate([0.9, 0.6], [1, 0])]
        summary = summarize_metrics(runs)
        assert summary.iterations == 2
        assert summary.mean["specificity"] == pytest.approx(0.5)
        assert summary.std["specificity"] == pytest.approx(0.5)
        assert summary.mean["auroc"] == pytest.approx(1.0)


class TestFeatures:
    """Feature layout."""

    def test_names(self):
        assert feature_names(["A", "B"], 2) == [
            "A_t0", "A_t1", "B_t0", "B_t1", "A_trust", "B_trust", "Age", "Gender", "SOFA", "SIRS",
        ]
        assert "A_trust" not in feature_names(["A"], 2, use_trust=False)

    def test_rows(self):
        sp = SimpleNamespace(age=70.0, gender="M", sofa=2, sirs=1)
        X = build_features([sp], [np.array([[0.1, 0.2]])], trust=np.array([[0.9]]))
        assert X.tolist() == [[0.1, 0.2, 0.9, 70.0, 1.0, 2.0, 1.0]]

    def test_non_finite_rejected(self):
        sp = SimpleNamespace(age=70.0, gender="F", sofa=0, sirs=0)
        with pytest.raises(ValueError):
            build_features([sp], [np.array([[np.nan]])])


class TestImportance:
    """Split counts grouped by vital."""

    def test_grouping_and_order(self):
        names = ["HeartRate_t0", "HeartRate_t1", "Temp_t0", "Temp_t1", "HeartRate_trust", "Age"]
        model = SimpleNamespace(
            feature_names=names,
            classifiers=[
                SimpleNamespace(ensemble=SimpleNamespace(split_counts=np.array([4, 2, 1, 0, 3, 0]))),
                SimpleNamespace(ensemble=SimpleNamespace(split_counts=np.array([0, 0, 1, 0, 0, 3]))),
            ],
        )
        ranked = feature_importance(model)
        assert ranked[0] == ("Age", 3.0)
        assert ranked[1:3] == [("HeartRate", 3.0), ("HeartRate_trust", 3.0)]
        assert ranked[-1] == ("Temp", 1.0)
        assert feature_importance(model, top=2) == ranked[:2]


class TestDetection:
    """Time from first alert to onset."""

    @pytest.fixture
    def model(self):
        stub = MagicMock()
        stub.predict_batch.side_effect = lambda X: (X[:, 0], (X[:, 0] >= 0.5).astype(int), np.zeros(len(X)))
        return stub

    def test_first_positive_window(self, model):
        """Windows are ordered by end hour before the first alert is taken."""
        features = np.array([[0.9], [0.1], [0.7]])
        assert time_to_detection(model, features, [15, 6, 12], onset=18) == 6

    def test_late_alert_is_negative(self, model):
        assert time_to_detection(model, np.array([[0.2], [0.8]]), [6, 9], onset=7) == -2

    def test_never_alerted(self, model):
        assert time_to_detection(model, np.array([[0.2]]), [6], onset=7) is None

    def test_histogram(self):
        out = detection_histogram([6, 6, -2, None])
        assert out == {"patients": 4, "never_alerted": 1, "histogram": {"-2": 1, "6": 2}}
