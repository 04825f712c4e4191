"""Anchor self-expression and the spectral embedding of the stacked coefficients.

For each view, with smoothed samples Xbar (n x m) and anchors A (m x p),

    min_Z ||Xbar^T - A Z^T||_F^2 + alpha ||Z||_F^2

has the closed form Z^T = (A^T A + alpha I)^{-1} A^T Xbar^T, a p x p solve.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import ConfigError, DataError, NumericalError

RANK_RTOL = 1e-10


@dataclass(frozen=True)
class AnchorSet:
    A: np.ndarray
    view_index: int = 0

    @classmethod
    def from_centers(cls, centers, view_index: int = 0) -> "AnchorSet":
        """K-means centers are rows; anchors are columns."""
        return cls(A=np.ascontiguousarray(np.asarray(centers, dtype=np.float64).T), view_index=view_index)

    @property
    def p(self) -> int:
        return self.A.shape[1]


@dataclass(frozen=True)
class CoefficientBlock:
    Z: np.ndarray
    view_index: int = 0


@dataclass(frozen=True)
class Embedding:
    Q: np.ndarray
    singular_values: np.ndarray


def _check_alpha(alpha) -> float:
    if not np.isfinite(alpha) or alpha <= 0:
        raise ConfigError(f"alpha must be a positive finite number, got {alpha!r}")
    return float(alpha)


def solve_coefficients(Xbar, anchors: AnchorSet, alpha: float) -> CoefficientBlock:
    alpha = _check_alpha(alpha)
    X = np.asarray(Xbar, dtype=np.float64)
    A = anchors.A
    if A.ndim != 2 or A.shape[1] < 1:
        raise DataError("anchor matrix must have at least one column")
    if X.shape[1] != A.shape[0]:
        raise DataError(f"feature dimension mismatch: samples have {X.shape[1]}, anchors {A.shape[0]}")
    G = A.T @ A
    G[np.diag_indices_from(G)] += alpha
    rhs = A.T @ X.T
    Zt = cho_solve(cho_factor(G, lower=True), rhs)
    return CoefficientBlock(Z=np.ascontiguousarray(Zt.T), view_index=anchors.view_index)


def objective(Xbar, anchors: AnchorSet, Z, alpha: float) -> float:
    """Value of the per-view ridge self-expression objective."""
    X = np.asarray(Xbar, dtype=np.float64)
    R = X.T - anchors.A @ np.asarray(Z).T
    return float(np.sum(R * R) + alpha * np.sum(np.asarray(Z) ** 2))


def stationarity_residual(Xbar, anchors: AnchorSet, Z, alpha: float) -> float:
    """Relative residual ||(A^T A + alpha I) Z^T - A^T Xbar^T|| / ||A^T Xbar^T||."""
    A = anchors.A
    rhs = A.T @ np.asarray(Xbar, dtype=np.float64).T
    lhs = (A.T @ A) @ np.asarray(Z).T + alpha * np.asarray(Z).T
    scale = np.linalg.norm(rhs)
    return float(np.linalg.norm(lhs - rhs) / scale) if scale > 0 else float(np.linalg.norm(lhs))


def concatenate(blocks: Sequence[CoefficientBlock]) -> np.ndarray:
    if not blocks:
        raise DataError("no coefficient blocks to concatenate")
    ordered = sorted(blocks, key=lambda b: b.view_index)
    n, p = ordered[0].Z.shape
    for b in ordered:
        if b.Z.shape != (n, p):
            raise DataError(f"block for view {b.view_index} has shape {b.Z.shape}, expected {(n, p)}")
    return np.hstack([b.Z for b in ordered])


def spectral_embedding(Zbar, g: int) -> Embedding:
    """Top-g left singular vectors of ``Zbar`` through its (pv x pv) Gram matrix.

    The eigenvectors of Zbar^T Zbar give a first estimate Zbar V / sigma; a
    thin QR plus a g x pv SVD then restores orthonormality to working
    precision. Everything stays linear in n.
    """
    Z = np.asarray(Zbar, dtype=np.float64)
    n, q = Z.shape
    if isinstance(g, bool) or int(g) != g or g < 1:
        raise ConfigError(f"cluster count must be a positive integer, got {g!r}")
    if g > min(n, q):
        raise ConfigError(f"cannot extract {g} singular vectors from a {n}x{q} matrix")

    gram = Z.T @ Z
    evals, evecs = np.linalg.eigh((gram + gram.T) * 0.5)
    top = np.argsort(evals)[::-1][:g]
    sigma_est = np.sqrt(np.clip(evals[top], 0.0, None))
    if sigma_est[0] <= 0:
        raise NumericalError("rank deficient: coefficient matrix is zero")
    V = evecs[:, top]

    Q0, _ = np.linalg.qr(Z @ V)
    Ub, sigma, _ = np.linalg.svd(Q0.T @ Z, full_matrices=False)
    if sigma[g - 1] <= RANK_RTOL * sigma[0]:
        raise NumericalError(
            f"rank deficient: fewer than {g} significant singular values "
            f"(sigma_{g}/sigma_1 = {sigma[g - 1] / sigma[0]:.3g})"
        )
    Q = Q0 @ Ub
    # deterministic sign: largest-magnitude entry of each column positive
    pivot = np.argmax(np.abs(Q), axis=0)
    signs = np.sign(Q[pivot, np.arange(g)])
    signs[signs == 0] = 1.0
    return Embedding(Q=Q * signs, singular_values=sigma)
