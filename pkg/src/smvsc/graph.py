"""Per-view affinity graphs and the symmetrically normalized Laplacian.

Graphs are built with the parameter-free adaptive-neighbour rule: every
sample spreads a unit of weight over its ``s`` nearest neighbours,

    w_ij = (d_i,(s+1) - d_ij) / (s * d_i,(s+1) - sum_{h<=s} d_i,(h))

with squared Euclidean distances ``d``. The directed weights are then
averaged with their transpose.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from .errors import ConfigError, DataError, NumericalError

DENSE_EIG_LIMIT = 5000
_BLOCK = 1024
KDTREE_MAX_DIM = 16
_DEGENERATE_RTOL = 1e-12


@dataclass(frozen=True)
class AffinityGraph:
    W: sp.csr_matrix
    degrees: np.ndarray

    @property
    def n(self) -> int:
        return self.W.shape[0]

    @classmethod
    def from_weights(cls, W) -> "AffinityGraph":
        """Wrap a symmetric nonnegative weight matrix (dense or sparse)."""
        W = sp.csr_matrix(W, dtype=np.float64)
        if W.shape[0] != W.shape[1]:
            raise DataError(f"weight matrix must be square, got {W.shape}")
        W.eliminate_zeros()
        if W.nnz and W.data.min() < 0:
            raise DataError("weight matrix has negative entries")
        if abs(W - W.T).max() > 1e-12 * max(1.0, abs(W).max()):
            raise DataError("weight matrix is not symmetric")
        degrees = np.asarray(W.sum(axis=1)).ravel()
        return cls(W=W, degrees=degrees)


@dataclass(frozen=True)
class NormalizedLaplacian:
    L: sp.csr_matrix
    degrees: np.ndarray

    @property
    def n(self) -> int:
        return self.L.shape[0]

    def null_vector(self) -> np.ndarray:
        """Unit vector along D^{1/2} 1, the eigenvalue-0 direction of a connected graph."""
        v = np.sqrt(self.degrees)
        return v / np.linalg.norm(v)


@dataclass(frozen=True)
class FrequencyAnalysis:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def coefficients(self, f) -> np.ndarray:
        return self.eigenvectors.T @ np.asarray(f, dtype=np.float64)

    def reconstruct(self, c) -> np.ndarray:
        return self.eigenvectors @ np.asarray(c, dtype=np.float64)


def pairwise_sq_distances(X) -> np.ndarray:
    X = _as_matrix(X)
    D = cdist(X, X, "sqeuclidean")
    np.fill_diagonal(D, 0.0)
    return D


def nearest_neighbors(X, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Indices and squared distances of the ``count`` nearest other samples.

    Rows are sorted by distance (ties broken by index). Low-dimensional data
    goes through a KD-tree; otherwise distances are computed exactly in row
    blocks so memory stays at O(block * n).
    """
    X = _as_matrix(X)
    n = X.shape[0]
    if not 1 <= count <= n - 1:
        raise ConfigError(f"neighbour count {count} outside [1, {n - 1}]")
    if X.shape[1] <= KDTREE_MAX_DIM and n > _BLOCK:
        return _tree_neighbors(X, count)
    idx = np.empty((n, count), dtype=np.int64)
    dist = np.empty((n, count), dtype=np.float64)
    for start in range(0, n, _BLOCK):
        stop = min(start + _BLOCK, n)
        D = cdist(X[start:stop], X, "sqeuclidean")
        rows = np.arange(stop - start)
        D[rows, rows + start] = np.inf
        if count < n - 1:
            part = np.argpartition(D, count - 1, axis=1)[:, :count]
        else:
            part = np.argsort(D, axis=1)[:, :count]
        pd = np.take_along_axis(D, part, axis=1)
        order = np.lexsort((part, pd), axis=1)
        idx[start:stop] = np.take_along_axis(part, order, axis=1)
        dist[start:stop] = np.take_along_axis(pd, order, axis=1)
    return idx, dist


def _tree_neighbors(X, count):
    n = X.shape[0]
    _, idx = cKDTree(X).query(X, k=count + 1)
    rows = np.arange(n)
    is_self = idx == rows[:, None]
    # duplicates may push the query point itself out of the result; drop the farthest instead
    is_self[~is_self.any(axis=1), -1] = True
    idx = idx[~is_self].reshape(n, count)
    diff = X[idx] - X[:, None, :]
    dist = np.einsum("ijk,ijk->ij", diff, diff)
    order = np.lexsort((idx, dist), axis=1)
    return np.take_along_axis(idx, order, axis=1), np.take_along_axis(dist, order, axis=1)


def neighbor_weights(X, s: int) -> tuple[np.ndarray, np.ndarray]:
    """Directed adaptive-neighbour weights: ``(indices, weights)``, both n x s.

    Each row of ``weights`` sums to one. When the s+1 nearest distances are
    all equal the closed form is 0/0 and uniform weights 1/s are used.
    """
    X = _as_matrix(X)
    n = X.shape[0]
    if not 1 <= s <= n - 2:
        raise ConfigError(f"neighbour count s={s} must satisfy 1 <= s <= n-2 = {n - 2}")
    idx, d = nearest_neighbors(X, s + 1)
    d_next = d[:, s]
    near = d[:, :s]
    denom = s * d_next - near.sum(axis=1)
    degenerate = denom <= _DEGENERATE_RTOL * s * d_next
    safe = np.where(degenerate, 1.0, denom)
    weights = (d_next[:, None] - near) / safe[:, None]
    weights[degenerate] = 1.0 / s
    return idx[:, :s], weights


def probabilistic_neighbors(X, s: int = 10) -> AffinityGraph:
    """Symmetrized adaptive-neighbour graph, W = (W_dir + W_dir^T) / 2."""
    X = _as_matrix(X)
    n = X.shape[0]
    idx, weights = neighbor_weights(X, s)
    rows = np.repeat(np.arange(n), s)
    W_dir = sp.csr_matrix((weights.ravel(), (rows, idx.ravel())), shape=(n, n))
    W = ((W_dir + W_dir.T) * 0.5).tocsr()
    W.eliminate_zeros()
    W.sort_indices()
    degrees = np.asarray(W.sum(axis=1)).ravel()
    return AffinityGraph(W=W, degrees=degrees)


def normalized_laplacian(G: AffinityGraph) -> NormalizedLaplacian:
    d = np.asarray(G.degrees, dtype=np.float64)
    if np.any(d <= 0):
        bad = int(np.flatnonzero(d <= 0)[0])
        raise NumericalError(f"isolated node {bad}: zero degree")
    inv_sqrt = sp.diags(1.0 / np.sqrt(d))
    S = (inv_sqrt @ G.W @ inv_sqrt).tocsr()
    L = (sp.identity(G.n, format="csr") - S).tocsr()
    L.sort_indices()
    return NormalizedLaplacian(L=L, degrees=d)


def smoothness(f, L: NormalizedLaplacian):
    """Quadratic form f^T L_s f; for a matrix, one value per column."""
    f = np.asarray(f, dtype=np.float64)
    Lf = L.L @ f
    if f.ndim == 1:
        return float(f @ Lf)
    return np.einsum("ij,ij->j", f, Lf)


def spectral_decompose(L: NormalizedLaplacian) -> FrequencyAnalysis:
    """Dense eigendecomposition, eigenvalues ascending. Diagnostic use only."""
    if L.n > DENSE_EIG_LIMIT:
        raise ConfigError(f"dense eigendecomposition limited to n <= {DENSE_EIG_LIMIT}, got {L.n}")
    A = L.L.toarray()
    vals, vecs = np.linalg.eigh((A + A.T) * 0.5)
    return FrequencyAnalysis(eigenvalues=vals, eigenvectors=vecs)


def save_graph(G: AffinityGraph, path: str | Path) -> None:
    """Debug dump of the upper triangle as ``i,j,w`` lines."""
    U = sp.triu(G.W, k=1).tocoo()
    order = np.lexsort((U.col, U.row))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for i, j, w in zip(U.row[order], U.col[order], U.data[order]):
            fh.write(f"{i},{j},{w:.17g}\n")


def _as_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DataError(f"expected a 2-D matrix, got shape {X.shape}")
    if X.shape[0] < 2:
        raise DataError("need at least 2 samples")
    if not np.all(np.isfinite(X)):
        raise DataError("matrix has NaN/Inf entries")
    return X
