"""Tests for k-means and the elbow diagnostics."""

import numpy as np
import pytest

from clinproj.mlkit import cluster_diagnostics, kmeans_assign, kmeans_fit


@pytest.fixture
def blobs():
    rng = np.random.default_rng(0)
    centers = np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]])
    X = np.vstack([c + rng.normal(0, 0.5, size=(50, 2)) for c in centers])
    return X, np.repeat([0, 1, 2], 50)


class TestKMeans:
    """Clustering fixed points and assignment."""

    def test_recovers_separated_blobs(self, blobs):
        X, truth = blobs
        model = kmeans_fit(X, 3, restarts=5, seed=1)
        for blob in range(3):
            assert len(set(model.labels[truth == blob])) == 1
        assert model.k == 3

    def test_fixed_point(self, blobs):
        """Each point sits with its nearest center, and each center is its cluster's mean."""
        X, _ = blobs
        model = kmeans_fit(X, 4, restarts=3, seed=2)
        assert np.array_equal(kmeans_assign(model, X), model.labels)
        for c in range(4):
            assert np.allclose(model.centers[c], X[model.labels == c].mean(axis=0))

    def test_seeded(self, blobs):
        X, _ = blobs
        a, b = kmeans_fit(X, 3, seed=7), kmeans_fit(X, 3, seed=7)
        assert np.array_equal(a.centers, b.centers)

    def test_assign_single_vector(self, blobs):
        X, _ = blobs
        model = kmeans_fit(X, 3, seed=0)
        assert kmeans_assign(model, X[0]).shape == (1,)

    def test_k_out_of_range(self, blobs):
        X, _ = blobs
        with pytest.raises(ValueError):
            kmeans_fit(X[:2], 3)


class TestClusterDiagnostics:
    """MSE and label concentration over a k range."""

    def test_rows(self, blobs):
        X, truth = blobs
        labels = (truth == 2).astype(int)
        rows = cluster_diagnostics(X, labels, range(1, 4), restarts=3)
        assert [r["k"] for r in rows] == [1.0, 2.0, 3.0]
        assert rows[0]["mse"] > rows[1]["mse"] > rows[2]["mse"]
        assert rows[0]["max_concentration"] == pytest.approx(1 / 3)
        assert rows[2]["max_concentration"] == pytest.approx(1.0)
