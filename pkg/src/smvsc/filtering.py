"""Low-pass graph filtering with response h(lambda) = (1 - lambda/2)^k."""

from __future__ import annotations

import numpy as np

from .errors import ConfigError, DataError
from .graph import FrequencyAnalysis, NormalizedLaplacian

_SPECTRUM_TOL = 1e-8


def _check_order(k) -> int:
    if isinstance(k, bool) or int(k) != k or k < 0:
        raise ConfigError(f"filter order must be a non-negative integer, got {k!r}")
    return int(k)


def filter_matrix(X, L: NormalizedLaplacian, k: int) -> np.ndarray:
    """Smooth every column of ``X``: returns (I - L_s/2)^k X.

    Applied as k sparse passes ``X <- X - (L_s X)/2``; the dense power is
    never formed. Equivalent to averaging each sample with the
    degree-normalized sum of its neighbours, k times. ``k == 0`` returns an
    exact copy.
    """
    k = _check_order(k)
    X = np.asarray(X, dtype=np.float64)
    if X.shape[0] != L.n:
        raise DataError(f"row count mismatch: signal has {X.shape[0]} rows, Laplacian is {L.n}x{L.n}")
    out = X.copy()
    for _ in range(k):
        out -= 0.5 * (L.L @ out)
    return out


def filter_signal(f, L: NormalizedLaplacian, k: int) -> np.ndarray:
    f = np.asarray(f, dtype=np.float64)
    if f.ndim != 1:
        raise DataError("filter_signal expects a 1-D signal; use filter_matrix for matrices")
    return filter_matrix(f, L, k)


def frequency_response(lam, k: int):
    k = _check_order(k)
    lam_arr = np.asarray(lam, dtype=np.float64)
    if np.any(lam_arr < -_SPECTRUM_TOL) or np.any(lam_arr > 2 + _SPECTRUM_TOL):
        raise ConfigError(f"graph frequency outside [0, 2]: {lam!r}")
    h = (1.0 - np.clip(lam_arr, 0.0, 2.0) / 2.0) ** k
    return float(h) if h.ndim == 0 else h


def spectral_filter(f, spectrum: FrequencyAnalysis, k: int) -> np.ndarray:
    """Reference path U H(Lambda) U^T f, built from a dense eigendecomposition."""
    k = _check_order(k)
    U = spectrum.eigenvectors
    h = (1.0 - np.clip(spectrum.eigenvalues, 0.0, 2.0) / 2.0) ** k
    c = U.T @ np.asarray(f, dtype=np.float64)
    if c.ndim == 1:
        return U @ (h * c)
    return U @ (h[:, None] * c)
