"""Dense complex matrix kernels.

Conventions used throughout the package
---------------------------------------
* Coordinates of a vector with respect to a frame ``e_1..e_r`` form a *row*
  vector ``x``; the matrix ``P`` of an endomorphism has the image of ``e_j``
  in its ``j``-th row, ``P(e_j) = sum_k P[j, k] e_k``, so ``P`` acts by
  ``x -> x @ P``.  Composition reverses: the matrix of ``P o R`` is ``R @ P``.
* The Gram matrix of ``h`` is ``H[j, k] = h(e_j, e_k)``; ``h`` is linear in
  its first slot and conjugate-linear in its second, ``h(x, y) = x H y^*``.
* A real structure ``kappa`` is stored as ``K`` with ``kappa(x) = conj(x) @ K``.
  The induced form ``g(x, y) = h(x, kappa y) = x (H K^*) y^T`` is bilinear.

The routines below are plain matrix routines; only the adjoint and form
helpers depend on the conventions above.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, InvalidRealStructure, NotHermitian, NotPositiveDefinite, Singular

DEFAULT_TOL = 1e-9

_EPS = np.finfo(float).eps


def as_cmatrix(a) -> np.ndarray:
    m = np.array(a, dtype=complex)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got shape {m.shape}")
    return m


def _require_square(a: np.ndarray, name: str = "matrix") -> None:
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got {a.shape}")


def fro(a) -> float:
    return float(np.linalg.norm(a))


def is_hermitian(a, tol: float = DEFAULT_TOL) -> bool:
    a = as_cmatrix(a)
    if a.shape[0] != a.shape[1]:
        return False
    return fro(a - a.conj().T) <= tol * max(fro(a), 1.0)


def is_unitary(a, tol: float = DEFAULT_TOL) -> bool:
    a = as_cmatrix(a)
    if a.shape[0] != a.shape[1]:
        return False
    n = a.shape[0]
    return fro(a.conj().T @ a - np.eye(n)) <= tol * max(n, 1)


def is_positive_definite(a, tol: float = DEFAULT_TOL) -> bool:
    if not is_hermitian(a, tol):
        return False
    values, _ = hermitian_eigen(a, tol)
    return bool(values[0] > tol * max(fro(a), 1.0))


def as_gram(H, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Validate ``H`` as the Gram matrix of a positive definite Hermitian form."""
    H = as_cmatrix(H)
    _require_square(H, "Gram matrix")
    if not is_hermitian(H, tol):
        raise NotHermitian("Gram matrix is not Hermitian")
    if not is_positive_definite(H, tol):
        raise NotPositiveDefinite("Gram matrix is not positive definite")
    return H


# ---------------------------------------------------------------------------
# Hermitian eigenproblem: cyclic Jacobi


def _jacobi_pair(a: np.ndarray, p: int, q: int):
    apq = a[p, q]
    mag = abs(apq)
    phase = apq / mag
    tau = (a[q, q].real - a[p, p].real) / (2.0 * mag)
    t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + math.hypot(1.0, tau))
    c = 1.0 / math.hypot(1.0, t)
    s = t * c
    w = phase.conjugate()
    return np.array([[c, s], [-s * w, c * w]])


def hermitian_eigen(H, tol: float = DEFAULT_TOL, max_sweeps: int = 60):
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Returns ``(values, V)`` with ``values`` ascending and ``V`` unitary such
    that ``H @ V == V @ diag(values)``.  Each eigenvector column is scaled so
    that its first non-negligible component is real and positive; eigenvalue
    ties are ordered lexicographically by eigenvector.

    Raises
    ------
    NotHermitian
        if ``||H - H^*|| > tol * ||H||``.
    """
    a = as_cmatrix(H)
    _require_square(a, "H")
    n = a.shape[0]
    scale = fro(a)
    if fro(a - a.conj().T) > tol * max(scale, _EPS):
        raise NotHermitian("matrix is not Hermitian within tolerance")
    a = 0.5 * (a + a.conj().T)
    v = np.eye(n, dtype=complex)
    stop = n * _EPS * max(scale, np.finfo(float).tiny)
    for _ in range(max_sweeps):
        off = fro(a - np.diag(np.diag(a)))
        if off <= stop:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if a[p, q] == 0:
                    continue
                r = _jacobi_pair(a, p, q)
                idx = [p, q]
                a[:, idx] = a[:, idx] @ r
                a[idx, :] = r.conj().T @ a[idx, :]
                v[:, idx] = v[:, idx] @ r
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
    values = np.real(np.diag(a)).copy()
    for j in range(n):
        col = v[:, j]
        big = np.flatnonzero(np.abs(col) > 1e-12 * max(np.abs(col).max(), 1e-300))
        if big.size:
            ph = col[big[0]] / abs(col[big[0]])
            v[:, j] = col * ph.conjugate()
    order = _eigen_order(values, v, tol * max(scale, 1.0))
    return values[order], v[:, order]


def _eigen_order(values: np.ndarray, v: np.ndarray, tie: float) -> list:
    idx = sorted(range(len(values)), key=lambda j: values[j])
    out = []
    i = 0
    while i < len(idx):
        group = [idx[i]]
        while i + 1 < len(idx) and values[idx[i + 1]] - values[group[0]] <= tie:
            i += 1
            group.append(idx[i])
        group.sort(key=lambda j: tuple((round(z.real, 10), round(z.imag, 10)) for z in v[:, j]))
        out.extend(group)
        i += 1
    return out


# ---------------------------------------------------------------------------
# Adjoints and forms


def h_form(x, y, H) -> complex:
    """``h(x, y) = x H y^*`` for coordinate row vectors."""
    return complex(np.asarray(x) @ np.asarray(H) @ np.conj(np.asarray(y)))


def apply_kappa(x, K) -> np.ndarray:
    return np.conj(np.asarray(x)) @ np.asarray(K)


def g_form(x, y, H, K) -> complex:
    """``g(x, y) = h(x, kappa y)``."""
    return h_form(x, apply_kappa(y, K), H)


def h_adjoint(P, H) -> np.ndarray:
    """Adjoint ``P^dagger`` with ``h(xP, y) = h(x, y P^dagger)``."""
    P = as_cmatrix(P)
    H = as_cmatrix(H)
    _require_square(P, "P")
    if P.shape != H.shape:
        raise DimensionMismatch(f"P has shape {P.shape} but H has shape {H.shape}")
    # H P^* H^{-1}
    return np.linalg.solve(H.T, (H @ P.conj().T).T).T


def check_real_structure(K, tol: float = DEFAULT_TOL) -> np.ndarray:
    K = as_cmatrix(K)
    _require_square(K, "K")
    n = K.shape[0]
    if fro(K @ K.conj() - np.eye(n)) > tol * max(fro(K) ** 2, 1.0):
        raise InvalidRealStructure("K conj(K) != I: kappa is not an involution")
    return K


def g_adjoint(P, H, K, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Bilinear adjoint ``P^*`` with ``g(xP, y) = g(x, y P^*)``."""
    P = as_cmatrix(P)
    H = as_cmatrix(H)
    K = check_real_structure(K, tol)
    if not (P.shape == H.shape == K.shape):
        raise DimensionMismatch("P, H and K must share one square shape")
    G = H @ K.conj().T
    # P^* = G^T P^T G^{-T}
    return np.linalg.solve(G, (G.T @ P.T).T).T


def orthonormal_frame(H, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Frame change ``S`` with ``S H S^* = I`` (new frame vectors are the rows of ``S``)."""
    H = as_cmatrix(H)
    try:
        L = np.linalg.cholesky(0.5 * (H + H.conj().T))
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("metric is not positive definite") from exc
    return scipy.linalg.solve_triangular(L, np.eye(H.shape[0]), lower=True)


def change_frame(P, S) -> np.ndarray:
    """Matrix of an endomorphism after the frame change ``e' = S e``."""
    return np.asarray(S) @ np.asarray(P) @ np.linalg.inv(S)


# ---------------------------------------------------------------------------
# Matrix exponential: scaling and squaring with the degree-13 Pade approximant

_PADE13 = (
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0, 129060195264000.0, 10559470521600.0,
    670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
    960960.0, 16380.0, 182.0, 1.0,
)
_THETA13 = 5.371920351148152


def matrix_exp(A) -> np.ndarray:
    A = as_cmatrix(A)
    _require_square(A, "A")
    n = A.shape[0]
    ident = np.eye(n, dtype=complex)
    norm1 = float(np.abs(A).sum(axis=0).max()) if n else 0.0
    if norm1 == 0.0:
        return ident
    s = max(0, int(math.ceil(math.log2(norm1 / _THETA13)))) if norm1 > _THETA13 else 0
    X = A / (2.0 ** s)
    b = _PADE13
    X2 = X @ X
    X4 = X2 @ X2
    X6 = X4 @ X2
    U = X @ (X6 @ (b[13] * X6 + b[11] * X4 + b[9] * X2)
             + b[7] * X6 + b[5] * X4 + b[3] * X2 + b[1] * ident)
    V = (X6 @ (b[12] * X6 + b[10] * X4 + b[8] * X2)
         + b[6] * X6 + b[4] * X4 + b[2] * X2 + b[0] * ident)
    R = np.linalg.solve(V - U, V + U)
    for _ in range(s):
        R = R @ R
    return R


# ---------------------------------------------------------------------------
# Dense solve


def solve_dense(A, b, pivot_tol: float = 1e3 * _EPS):
    """Solve ``A x = b`` by LU with partial pivoting.

    Returns ``(x, cond)`` where ``cond`` is the 2-norm condition number.
    Raises :class:`Singular` when a pivot falls below
    ``pivot_tol * max|A|``.
    """
    A = as_cmatrix(A)
    _require_square(A, "A")
    b = np.asarray(b, dtype=complex)
    if b.shape[0] != A.shape[0]:
        raise DimensionMismatch(f"rhs has {b.shape[0]} rows, matrix has {A.shape[0]}")
    amax = float(np.abs(A).max()) if A.size else 0.0
    if amax == 0.0:
        raise Singular("zero matrix")
    with warnings.catch_warnings():
        # exact zero pivots are reported through Singular below
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A, check_finite=True)
    if float(np.abs(np.diag(lu)).min()) <= pivot_tol * amax:
        raise Singular("pivot below threshold; matrix is numerically singular")
    x = scipy.linalg.lu_solve((lu, piv), b)
    return x, float(np.linalg.cond(A))
