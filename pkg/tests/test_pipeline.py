"""Tests for the cluster-then-predict model."""

import logging

import numpy as np
import pytest

from clinproj.mlkit import GBTParams, PipelineModel, predict, train_pipeline
from clinproj.projection import TrustScaler
from clinproj.schemas import ModelArtifact, RunManifest

FAST = GBTParams(max_depth=2, n_rounds=10)
NAMES = ["f0", "f1", "f2", "f3"]


def _manifest():
    return RunManifest(command="train", config_hash="test", seed=0)


def _train(X, y, k=2, **kwargs):
    return train_pipeline(
        X, y, NAMES[:X.shape[1]], k, FAST, 0, _manifest(),
        window=6, registry_hash="abc", kmeans_restarts=2, **kwargs,
    )


@pytest.fixture
def separable():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(400, 4))
    y = (X[:, 0] > 1.0).astype(int)
    return X, y


class TestTrainPipeline:
    """Fitting and prediction."""

    def test_fits_one_classifier_per_cluster(self, separable):
        X, y = separable
        model = _train(X, y, k=3)
        assert model.k == 3
        assert len(model.classifiers) == 3
        assert all(0.0 < c.threshold < 1.0 for c in model.classifiers)

    def test_training_accuracy(self, separable):
        X, y = separable
        _, labels, clusters = _train(X, y).predict_batch(X)
        assert (labels == y).mean() > 0.9
        assert set(np.unique(clusters)) <= {0, 1}

    def test_single_prediction(self, separable):
        X, y = separable
        model = _train(X, y)
        prob, label = predict(model, X[0])
        probs, labels, _ = model.predict_batch(X[:1])
        assert prob == pytest.approx(probs[0])
        assert label == labels[0]

    def test_single_class_cluster_falls_back(self, caplog):
        """A cluster holding only negatives predicts negative."""
        rng = np.random.default_rng(1)
        far = rng.normal(-20.0, 0.5, size=(200, 2))
        near = rng.normal(20.0, 1.0, size=(200, 2))
        X = np.vstack([far, near])
        y = np.r_[np.zeros(200, dtype=int), (near[:, 1] > 20.5).astype(int)]
        with caplog.at_level(logging.WARNING):
            model = _train(X, y, k=2)
        fallback = [c for c in model.classifiers if c.fallback]
        assert len(fallback) == 1
        assert fallback[0].threshold == 0.5
        probs, labels, _ = model.predict_batch(far)
        assert np.all(probs == 0.0) and np.all(labels == 0)
        assert any("single class" in r.getMessage() for r in caplog.records)

    def test_positive_only_cluster_predicts_positive(self, caplog):
        # Negatives are the overall majority; the far cluster still keeps its own class.
        rng = np.random.default_rng(2)
        far = rng.normal(-20.0, 0.5, size=(40, 2))
        near = rng.normal(20.0, 1.0, size=(360, 2))
        X = np.vstack([far, near])
        y = np.r_[np.ones(40, dtype=int), (near[:, 1] > 21.0).astype(int)]
        assert y.sum() < len(y) / 2
        with caplog.at_level(logging.WARNING):
            model = _train(X, y, k=2)
        fallback = [c for c in model.classifiers if c.fallback]
        assert len(fallback) == 1
        assert fallback[0].n_positive == fallback[0].n_train
        probs, labels, _ = model.predict_batch(far)
        assert np.all(probs == 1.0) and np.all(labels == 1)
        warned = [r for r in caplog.records if "single class (1)" in r.getMessage()]
        assert len(warned) == 1
        assert warned[0].__dict__["class"] == 1

    def test_seeded(self, separable):
        X, y = separable
        a, b = _train(X, y), _train(X, y)
        assert np.array_equal(a.predict_batch(X)[0], b.predict_batch(X)[0])
        assert a.manifest_hash() == b.manifest_hash()


class TestModelArtifact:
    """Persisted model round trip."""

    def test_round_trip_predicts_identically(self, separable):
        X, y = separable
        scaler = TrustScaler().fit(np.abs(X[:, :2]))
        model = _train(X, y, trust_scaler=scaler)
        artifact = ModelArtifact.model_validate_json(model.to_artifact().model_dump_json())
        back = PipelineModel.from_artifact(artifact)
        assert np.allclose(back.predict_batch(X)[0], model.predict_batch(X)[0])
        assert np.array_equal(back.predict_batch(X)[1], model.predict_batch(X)[1])
        assert back.use_trust
        assert np.allclose(back.trust_scaler.transform(np.abs(X[:5, :2])), scaler.transform(np.abs(X[:5, :2])))

    def test_center_dimension_checked(self, separable):
        X, y = separable
        payload = _train(X, y).to_artifact().model_dump()
        payload["feature_names"] = payload["feature_names"][:-1]
        with pytest.raises(ValueError):
            ModelArtifact.model_validate(payload)
