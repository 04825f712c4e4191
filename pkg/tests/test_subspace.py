import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import subspace_angles

from oracles import gradient_descent_oracle, ridge_gradient as gradient

from smvsc.errors import ConfigError, DataError, NumericalError
from smvsc.subspace import (
    AnchorSet,
    CoefficientBlock,
    concatenate,
    objective,
    solve_coefficients,
    spectral_embedding,
    stationarity_residual,
)


def test_analytic_gradient_matches_finite_differences():
    rng = np.random.default_rng(0)
    X, A, Z = rng.standard_normal((5, 4)), rng.standard_normal((4, 3)), rng.standard_normal((5, 3))
    G = gradient(X, A, Z, 0.7)
    h = 1e-6
    fd = np.zeros_like(Z)
    for idx in np.ndindex(Z.shape):
        E = np.zeros_like(Z)
        E[idx] = h
        fd[idx] = (objective(X, AnchorSet(A), Z + E, 0.7) - objective(X, AnchorSet(A), Z - E, 0.7)) / (2 * h)
    assert np.max(np.abs(fd - G)) <= 1e-6


def test_orthonormal_anchors():
    rng = np.random.default_rng(1)
    A, _ = np.linalg.qr(rng.standard_normal((6, 3)))
    X = rng.standard_normal((10, 6))
    Z = solve_coefficients(X, AnchorSet(A), 1.0).Z
    assert np.max(np.abs(Z - X @ A / 2)) <= 1e-12


def test_huge_alpha_shrinks_to_zero():
    rng = np.random.default_rng(2)
    A, X = rng.standard_normal((5, 4)), rng.standard_normal((30, 5))
    Z = solve_coefficients(X, AnchorSet(A), 1e9).Z
    assert np.linalg.norm(Z) <= np.linalg.norm(A.T @ X.T) / 1e9


def test_matches_gradient_oracle():
    rng = np.random.default_rng(3)
    X, A = rng.standard_normal((20, 6)), rng.standard_normal((6, 4))
    alpha = 0.5
    Z = solve_coefficients(X, AnchorSet(A), alpha).Z
    ref = gradient_descent_oracle(X, A, alpha)
    f, f_ref = objective(X, AnchorSet(A), Z, alpha), objective(X, AnchorSet(A), ref, alpha)
    assert abs(f - f_ref) <= 1e-6 * abs(f_ref)
    assert np.linalg.norm(gradient(X, A, Z, alpha)) <= 1e-8 * np.linalg.norm(2 * A.T @ X.T)
    assert stationarity_residual(X, AnchorSet(A), Z, alpha) <= 1e-6


def test_alpha_must_be_positive():
    A = AnchorSet(np.eye(2))
    for bad in (0.0, -1.0, np.nan):
        with pytest.raises(ConfigError):
            solve_coefficients(np.zeros((3, 2)), A, bad)
    with pytest.raises(DataError, match="dimension mismatch"):
        solve_coefficients(np.zeros((3, 5)), A, 1.0)


def test_from_centers_transposes():
    C = np.arange(6.0).reshape(3, 2)
    anchors = AnchorSet.from_centers(C, view_index=4)
    assert anchors.A.shape == (2, 3) and anchors.p == 3 and anchors.view_index == 4


def test_perturbation_increases_objective():
    rng = np.random.default_rng(4)
    X, A = rng.standard_normal((15, 5)), AnchorSet(rng.standard_normal((5, 4)))
    Z = solve_coefficients(X, A, 0.3).Z
    f = objective(X, A, Z, 0.3)
    for _ in range(100):
        D = rng.standard_normal(Z.shape)
        assert objective(X, A, Z + 1e-4 * D / np.linalg.norm(D), 0.3) > f


def test_objective_decomposes_over_views():
    rng = np.random.default_rng(5)
    views = [rng.standard_normal((12, m)) for m in (3, 5)]
    anchors = [AnchorSet(rng.standard_normal((m, 4)), i) for i, m in enumerate((3, 5))]
    blocks = [solve_coefficients(X, A, 2.0) for X, A in zip(views, anchors)]
    per_view = [objective(X, A, b.Z, 2.0) for X, A, b in zip(views, anchors, blocks)]
    total = sum(np.sum((X.T - A.A @ b.Z.T) ** 2) + 2.0 * np.sum(b.Z ** 2) for X, A, b in zip(views, anchors, blocks))
    assert sum(per_view) == pytest.approx(total, rel=1e-14)


def test_shrinkage_monotone():
    rng = np.random.default_rng(6)
    X, A = rng.standard_normal((25, 6)), AnchorSet(rng.standard_normal((6, 5)))
    norms = [np.linalg.norm(solve_coefficients(X, A, a).Z) for a in np.logspace(-3, 4, 15)]
    assert all(a >= b for a, b in zip(norms, norms[1:]))


def test_concatenate():
    one = CoefficientBlock(np.array([[1.0], [2.0]]), 0)
    two = CoefficientBlock(np.array([[3.0], [4.0]]), 1)
    assert np.array_equal(concatenate([one]), one.Z)
    assert concatenate([two, one]).tolist() == [[1, 3], [2, 4]]
    rng = np.random.default_rng(7)
    blocks = [CoefficientBlock(rng.standard_normal((6, 4)), j) for j in range(3)]
    Zbar = concatenate(blocks)
    for j in range(3):
        for c in range(4):
            assert np.array_equal(Zbar[:, j * 4 + c], blocks[j].Z[:, c])
    with pytest.raises(DataError):
        concatenate([one, CoefficientBlock(np.zeros((3, 1)), 1)])
    with pytest.raises(DataError):
        concatenate([])


def test_embedding_of_orthonormal_columns():
    Z, _ = np.linalg.qr(np.random.default_rng(8).standard_normal((20, 4)))
    emb = spectral_embedding(Z, 4)
    # equal singular values: only the span is determined
    assert np.max(subspace_angles(emb.Q, Z)) <= 1e-10
    assert np.allclose(emb.singular_values, 1.0, atol=1e-12)


def test_embedding_of_rank_one():
    rng = np.random.default_rng(9)
    u, w = rng.standard_normal(30), rng.standard_normal(5)
    emb = spectral_embedding(np.outer(u, w), 1)
    assert abs(abs(emb.Q[:, 0] @ u) / np.linalg.norm(u) - 1) <= 1e-12
    with pytest.raises(NumericalError, match="rank deficient"):
        spectral_embedding(np.outer(u, w), 2)


def test_embedding_matches_dense_svd():
    Z = np.random.default_rng(10).standard_normal((50, 8))
    emb = spectral_embedding(Z, 3)
    U, s, _ = np.linalg.svd(Z, full_matrices=False)
    assert np.max(subspace_angles(emb.Q, U[:, :3])) <= 1e-7
    assert np.max(np.abs(emb.Q.T @ emb.Q - np.eye(3))) <= 1e-8
    assert np.allclose(emb.singular_values, s[:3], rtol=1e-10)
    assert np.all(np.diff(emb.singular_values) <= 0)


def test_embedding_argument_checks():
    with pytest.raises(ConfigError):
        spectral_embedding(np.ones((3, 2)), 3)
    with pytest.raises(NumericalError):
        spectral_embedding(np.zeros((5, 3)), 1)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_embedding_invariant_under_right_rotation(seed, g):
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((40, 6))
    R, _ = np.linalg.qr(rng.standard_normal((6, 6)))
    a, b = spectral_embedding(Z, g), spectral_embedding(Z @ R, g)
    assert np.max(subspace_angles(a.Q, b.Q)) <= 1e-7
