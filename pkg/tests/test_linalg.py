import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import charpoly_roots, leibniz_det, random_complex, random_hermitian, random_pd
from ttstar.errors import DimensionMismatch, InvalidRealStructure, NotHermitian, NotPositiveDefinite, Singular
from ttstar.linalg import (
    as_gram,
    change_frame,
    g_adjoint,
    g_form,
    h_adjoint,
    h_form,
    hermitian_eigen,
    is_unitary,
    matrix_exp,
    orthonormal_frame,
    solve_dense,
)


@pytest.mark.parametrize("n", range(1, 7))
def test_jacobi_matches_charpoly_roots(rng, n):
    for _ in range(5):
        H = random_hermitian(rng, n)
        values, V = hermitian_eigen(H)
        roots = np.sort(charpoly_roots(H).real)
        assert np.abs(values - roots).max() <= 1e-9
        assert is_unitary(V, 1e-12)
        assert np.linalg.norm(H @ V - V @ np.diag(values)) <= 1e-12 * max(1, np.linalg.norm(H))


def test_jacobi_diagonal_and_degenerate():
    values, V = hermitian_eigen(np.diag([3.0, -1.0, 3.0]))
    assert values.tolist() == [-1.0, 3.0, 3.0]
    # ties ordered lexicographically by eigenvector
    assert np.allclose(V[:, 1], [0, 0, 1]) and np.allclose(V[:, 2], [1, 0, 0])


def test_jacobi_phase_normalized(rng):
    _, V = hermitian_eigen(random_hermitian(rng, 4))
    for j in range(4):
        first = V[np.flatnonzero(np.abs(V[:, j]) > 1e-12)[0], j]
        assert abs(first.imag) < 1e-14 and first.real > 0


def test_jacobi_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        hermitian_eigen(np.array([[0, 1], [0, 0]]))


def test_h_adjoint_defining_identity(rng):
    n = 4
    H = random_pd(rng, n)
    P = random_complex(rng, n, n)
    x, y = random_complex(rng, n), random_complex(rng, n)
    Pd = h_adjoint(P, H)
    assert abs(h_form(x @ P, y, H) - h_form(x, y @ Pd, H)) <= 1e-9 * np.linalg.norm(P) * 100


def test_h_adjoint_identity_metric_is_conjugate_transpose(rng):
    P = random_complex(rng, 3, 3)
    assert np.allclose(h_adjoint(P, np.eye(3)), P.conj().T)


def test_g_adjoint_exchange_structure():
    K = np.eye(2)[::-1]
    P = np.diag([0.3, -0.3])
    assert np.allclose(g_adjoint(P, np.eye(2), K), -P)


def test_g_form_is_bilinear_and_adjoint_identity(rng):
    n = 3
    K = np.eye(n)[::-1].astype(complex)
    H = np.eye(n)
    x, y = random_complex(rng, n), random_complex(rng, n)
    assert abs(g_form(2j * x, y, H, K) - 2j * g_form(x, y, H, K)) < 1e-12
    assert abs(g_form(x, 2j * y, H, K) - 2j * g_form(x, y, H, K)) < 1e-12
    P = random_complex(rng, n, n)
    Ps = g_adjoint(P, H, K)
    assert abs(g_form(x @ P, y, H, K) - g_form(x, y @ Ps, H, K)) < 1e-10


def test_g_adjoint_requires_involution():
    with pytest.raises(InvalidRealStructure):
        g_adjoint(np.eye(2), np.eye(2), 2 * np.eye(2))


def test_orthonormal_frame(rng):
    H = random_pd(rng, 5)
    S = orthonormal_frame(H)
    assert np.allclose(S @ H @ S.conj().T, np.eye(5), atol=1e-12)
    with pytest.raises(NotPositiveDefinite):
        orthonormal_frame(np.diag([1.0, -1.0]))


def test_change_frame_preserves_adjointness(rng):
    H = random_pd(rng, 3)
    P = random_complex(rng, 3, 3)
    S = random_complex(rng, 3, 3)
    lhs = change_frame(h_adjoint(P, H), S)
    rhs = h_adjoint(change_frame(P, S), S @ H @ S.conj().T)
    assert np.allclose(lhs, rhs, atol=1e-9)


def test_as_gram_errors():
    with pytest.raises(NotHermitian):
        as_gram([[1, 1], [0, 1]])
    with pytest.raises(NotPositiveDefinite):
        as_gram([[1, 0], [0, -1]])
    with pytest.raises(DimensionMismatch):
        as_gram([1, 2])


@pytest.mark.parametrize("scale", [1e-3, 0.5, 3.0, 40.0])
def test_matrix_exp_matches_scipy(rng, scale):
    A = scale * random_complex(rng, 5, 5)
    ref = scipy.linalg.expm(A)
    assert np.linalg.norm(matrix_exp(A) - ref) <= 1e-12 * np.linalg.norm(ref) * 10


def test_matrix_exp_inverse_identity(rng):
    for n in range(1, 7):
        A = random_complex(rng, n, n)
        assert np.linalg.norm(matrix_exp(A) @ matrix_exp(-A) - np.eye(n)) <= 1e-9


def test_matrix_exp_examples():
    assert np.allclose(matrix_exp(np.zeros((3, 3))), np.eye(3))
    assert np.allclose(matrix_exp(2j * np.pi * np.diag([-1, 0, 1])), np.eye(3), atol=1e-12)
    assert np.allclose(matrix_exp(2j * np.pi * np.diag([0.5, -0.5])), -np.eye(2), atol=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_solve_dense_matches_cramer(rng, n):
    A = random_complex(rng, n, n)
    b = random_complex(rng, n)
    x, cond = solve_dense(A, b)
    det = leibniz_det(A)
    for i in range(n):
        Ai = A.copy()
        Ai[:, i] = b
        assert abs(x[i] - leibniz_det(Ai) / det) <= 1e-9 * max(1, abs(x[i]))
    assert cond >= 1.0


def test_solve_dense_singular():
    with pytest.raises(Singular):
        solve_dense(np.array([[1.0, 2.0], [2.0, 4.0]]), np.ones(2))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_eigen_reconstruction_property(n, seed):
    rng = np.random.default_rng(seed)
    H = random_hermitian(rng, n)
    values, V = hermitian_eigen(H)
    assert np.all(np.diff(values) >= 0)
    assert np.linalg.norm(V @ np.diag(values) @ V.conj().T - H) <= 1e-11 * max(1, np.linalg.norm(H))
