"""Spectrum of Q: flat frames, the +-lambda pairing and graded products."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonConstant, NotFlat, PairingViolated, PreconditionViolated
from .jets import ConnectionData, Jet
from .linalg import (
    DEFAULT_TOL,
    as_cmatrix,
    change_frame,
    check_real_structure,
    fro,
    g_adjoint,
    h_adjoint,
    hermitian_eigen,
    orthonormal_frame,
)
from .model import CheckReport

ZERO_SNAP = 1e-7


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray
    pairing_ok: bool
    has_zero: bool
    trace: float
    diagonalizing_frame: np.ndarray | None = None

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "pairing_ok": self.pairing_ok,
            "has_zero": self.has_zero,
            "trace": self.trace,
        }


def _pairing_defect(values: np.ndarray) -> float:
    return float(np.abs(values + values[::-1]).max(initial=0.0))


def _snap_zero(values: np.ndarray, scale: float) -> np.ndarray:
    values = values.copy()
    if len(values) % 2 == 1:
        j = int(np.argmin(np.abs(values)))
        if abs(values[j]) <= ZERO_SNAP * max(scale, 1.0):
            values[j] = 0.0
    return values


def _summarize(values, tol, scale, frame=None, trace=None) -> SpectrumReport:
    values = _snap_zero(np.asarray(values, dtype=float), scale)
    trace = float(values.sum()) if trace is None else trace
    ok = _pairing_defect(values) <= tol * max(1.0, scale)
    return SpectrumReport(values, ok, bool(np.any(values == 0.0)), trace, frame)


def flat_frame(conn: ConnectionData, S0) -> Jet:
    """Holomorphic frame change ``S(t)`` with ``D' S = 0`` and ``S(0) = S0``.

    Solves ``d_i S = -S A_i`` coefficient by coefficient; the connection must
    be holomorphic.
    """
    A = conn.A
    m, d = A[0].m, A[0].degree
    for Ai in A:
        if not Ai.is_holomorphic():
            raise NotFlat("connection matrices depend on the conjugate coordinates")
    coeffs = {(0,) * (2 * m): np.asarray(S0, dtype=complex)}
    by_degree = sorted((mono for mono in _holo_monomials(m, d) if sum(mono)), key=sum)
    for mono in by_degree:
        i = next(k for k in range(m) if mono[k])
        lower = list(mono)
        lower[i] -= 1
        lower = tuple(lower)
        acc = np.zeros_like(coeffs[(0,) * (2 * m)])
        for ma, ca in A[i].items():
            rest = tuple(x - y for x, y in zip(lower, ma))
            if min(rest) >= 0 and rest in coeffs:
                acc = acc + coeffs[rest] @ ca
        coeffs[mono] = -acc / mono[i]
    return Jet(m, d, np.shape(S0), coeffs)


def _holo_monomials(m, d):
    for head in itertools.product(range(d + 1), repeat=m):
        if sum(head) <= d:
            yield head + (0,) * m


def flat_diagonalize(Q: Jet, conn: ConnectionData, metric: Jet, tol: float = DEFAULT_TOL) -> SpectrumReport:
    """Spectrum of ``Q`` read off in a flat orthonormal frame.

    ``D'`` must be holomorphic (else :class:`NotFlat`).  In the flat frame
    a ``D'``-parallel ``Q`` has a constant matrix; any drift, equivalently a
    nonzero ``D'Q``, raises :class:`NonConstant`.  The returned frame ``F``
    (rows are new frame vectors at the origin) satisfies
    ``F Q(0) F^{-1} = diag(eigenvalues)``.
    """
    d = Q.degree
    S0 = orthonormal_frame(metric.constant_part())
    S = flat_frame(conn, S0)
    Qf = S @ Q @ S.inv()
    drift = max(Qf.by_degree(d)[1:], default=0.0)
    if drift > tol:
        raise NonConstant(f"Q is not constant in the flat frame (drift {drift:.3g})")
    Q0 = Qf.constant_part()
    values, V = hermitian_eigen(0.5 * (Q0 + Q0.conj().T))
    frame = V.conj().T @ S0
    return _summarize(values, tol, fro(Q0), frame)


def pairing_spectrum(Q, H, K, tol: float = DEFAULT_TOL) -> SpectrumReport:
    """Spectrum of a tt*-compatible ``Q``, which is symmetric about 0."""
    Q, H = as_cmatrix(Q), as_cmatrix(H)
    K = check_real_structure(K, tol)
    if not (Q.shape == H.shape == K.shape):
        raise DimensionMismatch("Q, H and K must share one square shape")
    scale = max(1.0, fro(Q))
    if fro(Q - h_adjoint(Q, H)) > tol * scale:
        raise PairingViolated("Q is not h-self-adjoint")
    if fro(K @ H @ K.conj().T - H.conj()) > tol * max(1.0, fro(H)):
        raise PairingViolated("kappa does not preserve h")
    if fro(g_adjoint(Q, H, K, tol) + Q) > tol * scale:
        raise PairingViolated("Q^* + Q does not vanish")
    S = orthonormal_frame(H)
    Qo = change_frame(Q, S)
    values, V = hermitian_eigen(0.5 * (Qo + Qo.conj().T))
    return _summarize(values, tol, fro(Q), V.conj().T @ S, float(np.trace(Q).real))


def random_ttstar_instance(r: int, rng: np.random.Generator, spread: float = 2.0):
    """Random ``(Q, H, K)`` satisfying ``Q^dagger = Q`` and ``Q^* + Q = 0``.

    Starts from ``Q = diag(a_1..a_k, [0], -a_k..-a_1)``, ``H = I`` and the
    exchange structure, then applies a random invertible frame change.
    """
    half = rng.uniform(0.0, spread, r // 2)
    diag = np.concatenate([half, [0.0] * (r % 2), -half[::-1]])
    Q = np.diag(diag).astype(complex)
    H = np.eye(r, dtype=complex)
    K = np.eye(r, dtype=complex)[::-1]
    S = _random_frame(r, rng)
    return change_frame(Q, S), S @ H @ S.conj().T, S.conj() @ K @ np.linalg.inv(S)


def _random_unitary(r, rng):
    Z = rng.normal(size=(r, r)) + 1j * rng.normal(size=(r, r))
    q, R = np.linalg.qr(Z)
    return q * (np.diag(R) / np.abs(np.diag(R)))


def _random_frame(r, rng):
    return _random_unitary(r, rng) @ np.diag(np.exp(rng.uniform(-1, 1, r))) @ _random_unitary(r, rng)


# ---------------------------------------------------------------------------
# graded products


def _graded_setup(Q, C, tol):
    Q = as_cmatrix(Q)
    r = Q.shape[0]
    if fro(Q - np.diag(np.diag(Q))) > tol:
        raise PreconditionViolated("Q must be diagonal")
    C = [as_cmatrix(c) for c in C]
    if len(C) != r or any(c.shape != (r, r) for c in C):
        raise PreconditionViolated(f"need {r} structure matrices of size {r}x{r}, one per frame vector")
    scale = max(1.0, fro(Q), *(fro(c) for c in C))
    B = Q - np.eye(r)
    shift = max(fro(c @ Q - B @ c) for c in C)
    if shift > tol * scale:
        raise PreconditionViolated(f"C_j Q - (Q - I) C_j != 0 (residual {shift:.3g})")
    sym = max(fro(C[j][k] - C[k][j]) for j in range(r) for k in range(r))
    if sym > tol * scale:
        raise PreconditionViolated(f"product is not commutative (residual {sym:.3g})")
    return np.diag(Q).real, C


def product(C, x, y) -> np.ndarray:
    """``x o y`` for coordinate rows, with ``e_j o e_k`` the ``k``-th row of ``C[j]``."""
    return sum(x[j] * (np.asarray(y) @ C[j]) for j in range(len(C)))


def grading_shift_check(Q, C, tol: float = DEFAULT_TOL) -> CheckReport:
    """Eigenvector products under a grading-shift product.

    ``C[j]`` is the matrix of ``e_j o`` in the eigenframe of the diagonal ``Q``.
    """
    lam, C = _graded_setup(Q, C, tol)
    r = len(lam)
    rep = CheckReport(tol)
    cross, shifted = 0.0, 0.0
    for j in range(r):
        for k in range(r):
            v = C[j][k]
            if abs(lam[j] - lam[k]) > tol:
                cross = max(cross, float(np.abs(v).max()))
            else:
                outside = np.abs(lam - (lam[j] - 1.0)) > tol
                shifted = max(shifted, float(np.abs(v[outside]).max(initial=0.0)))
    basis = np.eye(r)
    triple, level = 0.0, 0.0
    for i in range(r):
        for j in range(r):
            xy = C[i][j]
            for k in range(r):
                size = float(np.abs(product(C, xy, basis[k])).max())
                triple = max(triple, size)
                if abs(lam[i] - lam[j]) <= tol and abs(lam[j] - lam[k]) <= tol:
                    level = max(level, size)
    rep.add("distinct-eigenvalues", cross)
    rep.add("eigenvalue-shift", shifted)
    # (e_i o e_j) o e_k with one common eigenvalue always vanishes; across
    # three rungs of a ladder it need not, and the report says so.
    rep.add("triple-products-one-level", level)
    rep.add("triple-products", triple)
    return rep


def normality_residual(C) -> list[np.ndarray]:
    return [c @ c.conj().T - c.conj().T @ c for c in (as_cmatrix(x) for x in C)]


def graded_normal_vanishing(Q, C, tol: float = DEFAULT_TOL) -> CheckReport:
    """A graded, commutative product with normal multiplication matrices vanishes."""
    _, C = _graded_setup(Q, C, tol)
    scale = max(1.0, *(fro(c) ** 2 for c in C))
    normal = max(fro(n) for n in normality_residual(C))
    if normal > tol * scale:
        raise PreconditionViolated(f"C_j are not normal (residual {normal:.3g})")
    rep = CheckReport(tol)
    rep.add("C-vanishes", max(fro(c) for c in C))
    rep.data["normality"] = normal
    return rep


def graded_basis(lam) -> list[np.ndarray]:
    """Basis of commutative products lowering the ``Q``-eigenvalue by one.

    Each element is a list of structure matrices; the ladder ``lam`` is the
    diagonal of ``Q``.
    """
    lam = np.asarray(lam, dtype=float)
    r = len(lam)
    out = []
    for j in range(r):
        for k in range(j, r):
            if abs(lam[j] - lam[k]) > 1e-12:
                continue
            for l_ in range(r):
                if abs(lam[l_] - (lam[j] - 1.0)) > 1e-12:
                    continue
                C = np.zeros((r, r, r), dtype=complex)
                C[j, k, l_] = 1.0
                C[k, j, l_] = 1.0
                out.append(C)
    return out


def search_normal_graded(lam, rng: np.random.Generator, iterations: int = 80, start_scale: float = 1.0):
    """Look for a nonzero normal element of the graded cone by Gauss-Newton.

    Starts at a random graded product and drives the normality defects
    ``[C_j, C_j^*]`` to zero.  Returns the final structure matrices and the
    remaining defect.
    """
    basis = graded_basis(lam)
    r = len(lam)
    if not basis:
        return [np.zeros((r, r), dtype=complex) for _ in range(r)], 0.0
    n = len(basis)
    coef = start_scale * (rng.normal(size=n) + 1j * rng.normal(size=n))

    def assemble(c):
        return np.tensordot(c, np.array(basis), axes=1)

    def defect(Cs):
        return np.concatenate([(x @ x.conj().T - x.conj().T @ x).ravel() for x in Cs])

    for _ in range(iterations):
        Cs = assemble(coef)
        f = defect(Cs)
        if np.abs(f).max() == 0.0:
            break
        cols = []
        for b in basis:
            for unit in (1.0, 1j):
                D = unit * b
                col = np.concatenate([(x @ y.conj().T + y @ x.conj().T - x.conj().T @ y - y.conj().T @ x).ravel()
                                      for x, y in zip(Cs, D)])
                cols.append(np.concatenate([col.real, col.imag]))
        J = np.array(cols).T
        rhs = -np.concatenate([f.real, f.imag])
        step = np.linalg.lstsq(J, rhs, rcond=None)[0]
        coef = coef + step[0::2] + 1j * step[1::2]
    Cs = list(assemble(coef))
    return Cs, float(np.abs(defect(Cs)).max())
