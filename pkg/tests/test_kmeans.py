import numpy as np
import pytest

from smvsc.errors import ConfigError
from smvsc.kmeans import KMeansConfig, _lloyd, kmeans, kmeans_plusplus
from smvsc.metrics import accuracy


def blobs(rng, per=20, sigma=0.1):
    means = np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]])
    labels = np.repeat(np.arange(3), per)
    return means[labels] + sigma * rng.standard_normal((3 * per, 2)), labels


def test_identical_pairs():
    X = np.array([[0.0, 0.0], [0.0, 0.0], [5.0, 5.0], [5.0, 5.0]])
    res = kmeans(X, KMeansConfig(2, seed=3))
    assert res.inertia == 0.0
    assert sorted(map(tuple, res.centers)) == [(0.0, 0.0), (5.0, 5.0)]


def test_one_cluster_per_point():
    X = np.random.default_rng(0).standard_normal((7, 3))
    res = kmeans(X, KMeansConfig(7, seed=1))
    assert res.inertia == 0.0
    assert sorted(res.assignment.tolist()) == list(range(7))


def test_blobs_recovered_with_optimal_inertia():
    X, labels = blobs(np.random.default_rng(5))
    res = kmeans(X, KMeansConfig(3, n_restarts=5, seed=0))
    assert accuracy(labels, res.assignment) == 1.0
    oracle = sum(((X[labels == c] - X[labels == c].mean(axis=0)) ** 2).sum() for c in range(3))
    assert abs(res.inertia - oracle) <= 1e-6


def test_too_many_clusters():
    X = np.array([[1.0], [1.0], [2.0]])
    with pytest.raises(ConfigError, match="distinct"):
        kmeans(X, KMeansConfig(3))


def test_config_validation():
    with pytest.raises(ConfigError):
        KMeansConfig(0)
    with pytest.raises(ConfigError):
        KMeansConfig(2, n_restarts=0)
    with pytest.raises(ConfigError):
        KMeansConfig(2, tol=-1.0)


def test_determinism_and_inertia_bookkeeping():
    X = np.random.default_rng(9).standard_normal((200, 4))
    a = kmeans(X, KMeansConfig(8, seed=42))
    b = kmeans(X, KMeansConfig(8, seed=42))
    assert np.array_equal(a.centers, b.centers) and np.array_equal(a.assignment, b.assignment)
    assert a.inertia == b.inertia
    recomputed = ((X - a.centers[a.assignment]) ** 2).sum()
    assert abs(a.inertia - recomputed) <= 1e-8
    assert a.assignment.min() >= 0 and a.assignment.max() < 8


def test_inertia_monotone_per_iteration():
    X = np.random.default_rng(10).standard_normal((500, 3))
    cfg = KMeansConfig(12)
    for child in np.random.SeedSequence(3).spawn(5):
        rng = np.random.default_rng(child)
        res = _lloyd(X, kmeans_plusplus(X, 12, rng), cfg)
        h = np.array(res.history)
        assert np.all(np.diff(h) <= 1e-12 * h[:-1])


def test_restarts_independent_of_order():
    X = np.random.default_rng(11).standard_normal((150, 2))
    cfg = KMeansConfig(5, n_restarts=4, seed=7)
    runs = [_lloyd(X, kmeans_plusplus(X, 5, np.random.default_rng(c)), cfg)
            for c in reversed(np.random.SeedSequence(7).spawn(4))]
    best = min(runs[::-1], key=lambda r: r.inertia)
    assert kmeans(X, cfg).inertia == best.inertia


def test_permutation_equivariance():
    rng = np.random.default_rng(12)
    X, _ = blobs(rng)
    perm = rng.permutation(len(X))
    a = kmeans(X, KMeansConfig(3, seed=1)).assignment
    b = kmeans(X[perm], KMeansConfig(3, seed=1)).assignment
    assert accuracy(a[perm], b) == 1.0


def test_empty_cluster_is_reseeded():
    X = np.array([[0.0], [0.1], [0.2], [5.0], [5.1]])
    start = np.array([[0.1], [5.05], [100.0]])
    res = _lloyd(X, start.copy(), KMeansConfig(3))
    assert np.bincount(res.assignment, minlength=3).min() >= 1
    assert np.all(res.centers < 10)
