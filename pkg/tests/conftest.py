from __future__ import annotations

import numpy as np
import pytest
import scipy.sparse as sp

from smvsc.graph import AffinityGraph, normalized_laplacian, probabilistic_neighbors

_ACCEPTANCE = []


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion for the terminal summary."""

    def record(criterion: str, passed: bool | None, detail: str = ""):
        status = "SKIP" if passed is None else "PASS" if passed else "FAIL"
        _ACCEPTANCE.append((criterion, status, detail))
        print(f"{status}  {criterion}  {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, status, detail in sorted(_ACCEPTANCE, key=lambda r: int(r[0].split()[0][1:])):
        terminalreporter.write_line(f"{status}  {criterion}  {detail}")


def random_laplacian(rng, n, s=None, dims=2):
    X = rng.standard_normal((n, dims))
    if s is None:
        s = int(rng.integers(2, min(6, n - 2) + 1))
    return X, normalized_laplacian(probabilistic_neighbors(X, s))


def laplacian_from_dense(W):
    return normalized_laplacian(AffinityGraph.from_weights(sp.csr_matrix(np.asarray(W, float))))
