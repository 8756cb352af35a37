"""Sylvester equations ``X A - B X = Y`` and recovery of the Higgs field from ``D'U``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CommonEigenvalue, DimensionMismatch, ISViolated, NonConstant, NonRealSpectrum, NotFlat
from .jets import covariant_d, d_anti
from .linalg import DEFAULT_TOL, as_cmatrix, fro, hermitian_eigen, is_hermitian, solve_dense
from .model import CheckReport, CVBundleData


def _spectrum(a: np.ndarray) -> np.ndarray:
    if is_hermitian(a, 1e-12):
        return hermitian_eigen(a)[0].astype(complex)
    return np.linalg.eigvals(a)


def spectral_gap(A, B) -> float:
    """Smallest distance between an eigenvalue of ``A`` and one of ``B``."""
    ea, eb = _spectrum(as_cmatrix(A)), _spectrum(as_cmatrix(B))
    return float(np.abs(ea[:, None] - eb[None, :]).min())


def sylvester_operator(A, B) -> np.ndarray:
    """Matrix of ``X -> X A - B X`` acting on column-major ``vec(X)``."""
    A, B = as_cmatrix(A), as_cmatrix(B)
    k, l_ = A.shape[0], B.shape[0]
    return np.kron(A.T, np.eye(l_)) - np.kron(np.eye(k), B)


def _solve_many(A, B, Ys, gap: float, gap_tol: float | None):
    """Solve ``X A - B X = Y`` for every ``Y`` with one factorization."""
    k, l_ = A.shape[0], B.shape[0]
    if gap_tol is None:
        gap_tol = 1e-7 * (fro(A) + fro(B))
    if gap <= gap_tol:
        raise CommonEigenvalue(f"A and B share an eigenvalue (gap {gap:.3g})", gap)
    for Y in Ys:
        if Y.shape != (l_, k):
            raise DimensionMismatch(f"shapes A{A.shape}, B{B.shape}, Y{Y.shape} are inconsistent")
    if not Ys:
        return [], 1.0
    rhs = np.stack([Y.reshape(-1, order="F") for Y in Ys], axis=1)
    vecs, cond = solve_dense(sylvester_operator(A, B), rhs)
    return [vecs[:, j].reshape((l_, k), order="F") for j in range(len(Ys))], cond


def solve_sylvester(A, B, Y, gap_tol: float | None = None, with_condition: bool = False):
    """Unique ``X`` (``l x k``) with ``X A - B X = Y``.

    The spectra of ``A`` and ``B`` must be separated by more than ``gap_tol``
    (default ``1e-7 * (||A|| + ||B||)``); otherwise :class:`CommonEigenvalue`
    is raised instead of returning a least-squares compromise.
    """
    A, B, Y = as_cmatrix(A), as_cmatrix(B), as_cmatrix(Y)
    if A.shape[0] != A.shape[1] or B.shape[0] != B.shape[1]:
        raise DimensionMismatch(f"A{A.shape} and B{B.shape} must be square")
    (X,), cond = _solve_many(A, B, [Y], spectral_gap(A, B), gap_tol)
    return (X, cond) if with_condition else X


@dataclass(frozen=True)
class ISReport:
    eigenvalues: np.ndarray
    margin: float
    holds: bool


def is_condition(Q, tol: float = DEFAULT_TOL) -> ISReport:
    """Distance of all eigenvalue differences of ``Q`` from ``+-1``.

    The margin includes the zero self-differences, so it never exceeds 1.
    """
    Q = as_cmatrix(Q)
    vals = _spectrum(Q)
    if np.abs(vals.imag).max(initial=0.0) > tol * max(1.0, fro(Q)):
        raise NonRealSpectrum("Q has non-real eigenvalues")
    lam = np.sort(vals.real)
    diffs = np.abs(lam[:, None] - lam[None, :])
    margin = float(np.abs(diffs - 1.0).min())
    return ISReport(lam, margin, margin > tol)


def recover_higgs(Q, dU, tol: float = DEFAULT_TOL) -> list[np.ndarray]:
    """Solve ``C_i Q - (Q - I) C_i = dU_i`` for every direction ``i``."""
    Q = as_cmatrix(Q)
    report = is_condition(Q, tol)
    if not report.holds:
        raise ISViolated(report)
    lam = report.eigenvalues
    # spectrum of Q - I is lam - 1, so the gap is the IS distance of differences from 1
    gap = float(np.abs(lam[:, None] - (lam[None, :] - 1.0)).min())
    B = Q - np.eye(Q.shape[0])
    return _solve_many(Q, B, [as_cmatrix(Y) for Y in dU], gap, None)[0]


def ucq_residual(Q, C, dU) -> float:
    """``max_i ||C_i Q - (Q - I) C_i - dU_i||``."""
    Q = as_cmatrix(Q)
    B = Q - np.eye(Q.shape[0])
    return max((fro(Ci @ Q - B @ Ci - Yi) for Ci, Yi in zip(C, dU)), default=0.0)


def conditioning_along(eps_values, base=(0.5, -0.5)) -> list[float]:
    """Condition numbers of the recovery system for ``Q = diag(base[0] + eps, base[1:])``."""
    out = []
    for eps in eps_values:
        Q = np.diag([base[0] + eps, *base[1:]]).astype(complex)
        out.append(float(np.linalg.cond(sylvester_operator(Q, Q - np.eye(len(base))))))
    return out


def theorem_u0_verify(B: CVBundleData, tol: float = DEFAULT_TOL) -> CheckReport:
    """Check the vanishing / recovery / constant-spectrum conclusions at the origin.

    Residuals: ``IS-margin`` (must stay above ``tol``), then either
    ``Phi-vanishes`` and ``Dprime-holomorphic`` (when ``D'U`` vanishes) or
    ``Phi-recovery`` (when it does not), and ``constant-spectrum``.
    """
    from .spectrum import flat_diagonalize

    rep = CheckReport(tol)
    d = B.jet_degree
    Q0 = B.Q.constant_part()
    isr = is_condition(Q0, tol)
    rep.add("IS-margin", isr.margin, lower_bound=True)
    rep.data["Q_eigenvalues"] = [float(x) for x in isr.eigenvalues]
    conn = B.connection()
    dU = covariant_d(conn, B.U)
    dU_size = max(f.max_abs(d - 1) for f in dU)
    rep.data["DprimeU"] = dU_size
    names = ("Phi-vanishes", "Dprime-holomorphic", "Phi-recovery", "constant-spectrum")
    if not isr.holds:
        for name in names:
            rep.skip(name, "IS condition fails at the origin")
        return rep
    vanishing = dU_size <= tol
    if vanishing:
        rep.add("Phi-vanishes", max(C.max_abs() for C in B.higgs), certified_degree=d)
        dbarA = [d_anti(A, j) for A in conn.A for j in range(1, B.dim + 1)]
        rep.add("Dprime-holomorphic", max(f.max_abs(d - 2) for f in dbarA), certified_degree=d - 2)
        rep.skip("Phi-recovery", "D'U vanishes")
    else:
        rep.skip("Phi-vanishes", "D'U does not vanish")
        rep.skip("Dprime-holomorphic", "D'U does not vanish")
        C_rec = recover_higgs(Q0, [f.constant_part() for f in dU], tol)
        rep.add("Phi-recovery", max(fro(Cr - C.constant_part()) for Cr, C in zip(C_rec, B.higgs)))
        rep.data["recovered_higgs"] = [[[complex(v) for v in row] for row in Cr] for Cr in C_rec]
    try:
        flat = flat_diagonalize(B.Q, conn, B.metric, tol)
    except (NotFlat, NonConstant) as exc:
        if vanishing:
            rep.add("constant-spectrum", float("inf"), note=f"{type(exc).__name__}: {exc}")
        else:
            rep.skip("constant-spectrum", f"D' not flat here ({type(exc).__name__})")
    else:
        rep.add("constant-spectrum", 0.0)
        rep.data["Lambda"] = [float(x) for x in flat.eigenvalues]
    return rep
