"""External clustering metrics: ACC, NMI and purity."""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DataError


def contingency(truth, pred) -> np.ndarray:
    """Counts table, rows = true clusters, columns = predicted clusters.

    Labels are compacted first, so arbitrary ids are accepted.
    """
    truth = np.asarray(truth).ravel()
    pred = np.asarray(pred).ravel()
    if truth.shape != pred.shape:
        raise DataError(f"length mismatch: {truth.size} true labels vs {pred.size} predicted")
    if truth.size == 0:
        raise DataError("empty label vectors")
    _, t = np.unique(truth, return_inverse=True)
    _, p = np.unique(pred, return_inverse=True)
    table = np.zeros((t.max() + 1, p.max() + 1), dtype=np.int64)
    np.add.at(table, (t.ravel(), p.ravel()), 1)
    return table


def best_assignment(weights) -> tuple[np.ndarray, np.ndarray]:
    """Maximum-weight matching on a rectangular table, zero-padded to square."""
    W = np.asarray(weights)
    size = max(W.shape)
    padded = np.zeros((size, size), dtype=W.dtype)
    padded[: W.shape[0], : W.shape[1]] = W
    rows, cols = linear_sum_assignment(padded, maximize=True)
    keep = (rows < W.shape[0]) & (cols < W.shape[1])
    return rows[keep], cols[keep]


def accuracy(truth, pred) -> float:
    table = contingency(truth, pred)
    rows, cols = best_assignment(table)
    return float(table[rows, cols].sum() / table.sum())


def _entropy(counts: np.ndarray, n: int) -> float:
    p = counts[counts > 0] / n
    return float(-np.sum(p * np.log(p)))


def nmi(truth, pred) -> float:
    """Mutual information normalized by sqrt(H(truth) * H(pred)), natural logs."""
    table = contingency(truth, pred)
    n = int(table.sum())
    h_true = _entropy(table.sum(axis=1), n)
    h_pred = _entropy(table.sum(axis=0), n)
    if h_true == 0.0 or h_pred == 0.0:
        # single-cluster partitions: identical only when both are trivial
        return 1.0 if h_true == h_pred else 0.0
    nz = table > 0
    pij = table[nz] / n
    outer = np.outer(table.sum(axis=1), table.sum(axis=0))[nz] / (n * n)
    mi = float(np.sum(pij * np.log(pij / outer)))
    return float(min(max(mi / np.sqrt(h_true * h_pred), 0.0), 1.0))


def purity(truth, pred) -> float:
    table = contingency(truth, pred)
    return float(table.max(axis=0).sum() / table.sum())


def evaluate(truth, pred) -> dict[str, float]:
    return {"acc": accuracy(truth, pred), "nmi": nmi(truth, pred), "pur": purity(truth, pred)}
