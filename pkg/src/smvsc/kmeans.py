"""Seedable Lloyd K-means with k-means++ initialisation.

Every restart draws from its own child of ``SeedSequence(seed)``, so the
result does not depend on the order restarts are executed in.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError


@dataclass(frozen=True)
class KMeansConfig:
    clusters: int
    max_iters: int = 300
    n_restarts: int = 10
    tol: float = 1e-9
    seed: int = 0

    def __post_init__(self):
        for name in ("clusters", "max_iters", "n_restarts"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if not self.tol >= 0:
            raise ConfigError(f"tol must be non-negative, got {self.tol!r}")


@dataclass
class KMeansResult:
    centers: np.ndarray
    assignment: np.ndarray
    inertia: float
    iterations: int
    history: list[float] = field(default_factory=list, repr=False)


def _sq_dist_to_centers(X, x_sq, C):
    D = X @ C.T
    D *= -2.0
    D += x_sq[:, None]
    D += np.einsum("ij,ij->i", C, C)[None, :]
    np.maximum(D, 0.0, out=D)
    return D


def _inertia(X, C, labels) -> float:
    diff = X - C[labels]
    return float(np.einsum("ij,ij->", diff, diff))


def kmeans_plusplus(X, c: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    centers = np.empty((c, X.shape[1]))
    first = int(rng.integers(n))
    centers[0] = X[first]
    closest = np.einsum("ij,ij->i", X - X[first], X - X[first])
    for j in range(1, c):
        total = closest.sum()
        if total <= 0:
            # every point already coincides with a chosen center
            pick = int(rng.integers(n))
        else:
            pick = int(np.searchsorted(np.cumsum(closest), rng.random() * total, side="right"))
            pick = min(pick, n - 1)
        centers[j] = X[pick]
        diff = X - X[pick]
        np.minimum(closest, np.einsum("ij,ij->i", diff, diff), out=closest)
    return centers


def _repair_empty(X, C, labels, counts):
    """Move each empty center onto the point farthest from its own center."""
    empty = np.flatnonzero(counts == 0)
    if empty.size == 0:
        return
    diff = X - C[labels]
    far = np.einsum("ij,ij->i", diff, diff)
    for j in empty:
        i = int(np.argmax(far))
        C[j] = X[i]
        labels[i] = j
        far[i] = -1.0


def _lloyd(X, C, cfg: KMeansConfig) -> KMeansResult:
    x_sq = np.einsum("ij,ij->i", X, X)
    c = C.shape[0]
    history = []
    prev = np.inf
    labels = None
    it = 0
    for it in range(1, cfg.max_iters + 1):
        new_labels = np.argmin(_sq_dist_to_centers(X, x_sq, C), axis=1)
        inertia = _inertia(X, C, new_labels)
        history.append(inertia)
        unchanged = labels is not None and np.array_equal(new_labels, labels)
        labels = new_labels
        if unchanged or prev - inertia <= cfg.tol * max(prev, 1e-300) and np.isfinite(prev):
            break
        prev = inertia
        counts = np.bincount(labels, minlength=c)
        if np.any(counts == 0):
            _repair_empty(X, C, labels, counts)
            counts = np.bincount(labels, minlength=c)
        sums = np.column_stack([np.bincount(labels, weights=col, minlength=c) for col in X.T])
        nz = counts > 0
        C[nz] = sums[nz] / counts[nz, None]
    return KMeansResult(centers=C, assignment=labels.astype(np.int64), inertia=history[-1],
                        iterations=it, history=history)


def kmeans(X, cfg: KMeansConfig) -> KMeansResult:
    """Best of ``cfg.n_restarts`` Lloyd runs by inertia (first wins ties)."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise DataError(f"expected a non-empty 2-D matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise DataError("K-means input has NaN/Inf entries")
    distinct = np.unique(X, axis=0).shape[0]
    if cfg.clusters > distinct:
        raise ConfigError(f"cannot form {cfg.clusters} clusters from {distinct} distinct points")

    best = None
    for child in np.random.SeedSequence(cfg.seed).spawn(cfg.n_restarts):
        rng = np.random.default_rng(child)
        result = _lloyd(X, kmeans_plusplus(X, cfg.clusters, rng), cfg)
        if best is None or result.inertia < best.inertia:
            best = result
    return best
