"""Hodge-theoretic data attached to tt*-bundles with ``U = 0``.

Weight-0 gradings ``H = sum_p H^p`` with a flat Hermitian form ``k`` become
bundles with ``Q = p`` on ``H^p`` and ``h = sum_p (-1)^p k``; conversely the
eigenspaces of ``Q`` regroup into Hodge pieces ``H^{p, w-p}``.
"""

from __future__ import annotations

import math
import warnings
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    EigenvalueOnWall,
    InvariantViolation,
    MissingRealStructure,
    NondegeneracyFailure,
    NotHermitian,
    PositivityWarning,
    PreconditionViolated,
    SchemaError,
)
from .linalg import DEFAULT_TOL, as_cmatrix, fro, hermitian_eigen, is_hermitian, matrix_exp, orthonormal_frame
from .model import CheckReport, CVBundleData, matrix_to_json, parse_json, validate


@dataclass(frozen=True)
class VHSData:
    weight: int
    grading: list          # (p, dim), p descending
    pieces: dict           # p -> rows spanning H^{p, w-p}
    k_form: np.ndarray
    metric: np.ndarray
    A: np.ndarray
    S: np.ndarray | None = None
    kappa: np.ndarray | None = None
    transversality: str = "vacuous"

    @property
    def filtration(self) -> list:
        """``(p, rows spanning F^p)`` from the empty top step down to ``F^{min p} = H``."""
        ps = sorted(self.pieces)
        r = self.metric.shape[0]
        out = []
        for p in range(ps[-1] + 1, ps[0] - 1, -1):
            rows = [self.pieces[q] for q in ps if q >= p]
            out.append((p, np.vstack(rows) if rows else np.zeros((0, r), dtype=complex)))
        return out

    def projector(self, p: int) -> np.ndarray:
        """Matrix of the projection onto ``H^p`` along the other pieces."""
        F = np.vstack([self.pieces[q] for q in sorted(self.pieces)])
        D = np.zeros(len(F))
        start = 0
        for q in sorted(self.pieces):
            n = len(self.pieces[q])
            if q == p:
                D[start:start + n] = 1.0
            start += n
        return np.linalg.solve(F, np.diag(D) @ F)

    def pairing(self) -> np.ndarray:
        if self.S is None:
            raise MissingRealStructure("the pairing S needs a real structure")
        return self.S


def _grading_list(grading) -> list:
    out = []
    for item in grading:
        p, dim = item
        if isinstance(p, bool) or not float(p).is_integer() or not float(dim).is_integer() or dim < 0:
            raise SchemaError(f"grading entry {item!r}: p must be an integer and dim a non-negative integer",
                              "grading")
        out.append((int(p), int(dim)))
    return out


def _blocks(k_blocks, grading) -> list:
    dims = [d for _, d in grading]
    r = sum(dims)
    if isinstance(k_blocks, np.ndarray) or (k_blocks and np.ndim(k_blocks[0]) == 1):
        K = as_cmatrix(k_blocks)
        if K.shape != (r, r):
            raise DimensionMismatch(f"k must be {r}x{r}")
        blocks, start = [], 0
        for d in dims:
            blocks.append(K[start:start + d, start:start + d])
            off = np.delete(K[start:start + d], np.s_[start:start + d], axis=1)
            if off.size and fro(off) > 0:
                raise NondegeneracyFailure("k must be block diagonal along the grading")
            start += d
        return blocks
    blocks = [as_cmatrix(b) if d else np.zeros((0, 0), dtype=complex) for b, d in zip(k_blocks, dims)]
    if len(blocks) != len(dims) or any(b.shape != (d, d) for b, d in zip(blocks, dims)):
        raise DimensionMismatch("one k block per graded piece is required")
    return blocks


def exchange_kappa(grading) -> np.ndarray:
    """Real structure exchanging ``H^p`` with ``H^{-p}`` basis vector by basis vector."""
    grading = _grading_list(grading)
    offsets, start = {}, 0
    for p, d in grading:
        if p in offsets:
            raise PreconditionViolated(f"grading repeats p = {p}")
        offsets[p] = (start, d)
        start += d
    K = np.zeros((start, start), dtype=complex)
    for p, (s, d) in offsets.items():
        if (-p) not in offsets or offsets[-p][1] != d:
            raise PreconditionViolated("grading is not symmetric under p -> -p")
        t = offsets[-p][0]
        K[s:s + d, t:t + d] = np.eye(d)
    return K


def vhs_to_ttstar(grading, k_blocks, weight: int = 0, kappa=None, dim: int = 1,
                  tol: float = DEFAULT_TOL) -> CVBundleData:
    """Constant bundle with ``Q = p`` on ``H^p``, ``U = 0``, ``Phi = 0``, ``h = sum (-1)^p k``."""
    grading = _grading_list(grading)
    blocks = _blocks(k_blocks, grading)
    r = sum(d for _, d in grading)
    if r == 0:
        raise DimensionMismatch("grading has total rank 0")
    H = np.zeros((r, r), dtype=complex)
    qdiag = []
    start = 0
    for (p, d), k in zip(grading, blocks):
        if d:
            if not is_hermitian(k, tol):
                raise NotHermitian(f"k block for p = {p} is not Hermitian")
            if abs(np.linalg.det(k)) <= tol * max(1.0, fro(k)) ** d:
                raise NondegeneracyFailure(f"k block for p = {p} is degenerate")
        H[start:start + d, start:start + d] = (-1) ** (p % 2) * k
        qdiag += [p] * d
        start += d
    if hermitian_eigen(H, tol)[0][0] <= tol:
        warnings.warn("sum of (-1)^p k is not positive definite", PositivityWarning, stacklevel=2)
        raise InvariantViolation("metric", "sum of (-1)^p k is not positive definite")
    zero = np.zeros((r, r))
    return CVBundleData.constant(H, [zero] * dim, zero, np.diag(qdiag), kappa=kappa, weight=weight)


def ttstar_to_vhs(B: CVBundleData, w: int, tol: float = DEFAULT_TOL) -> VHSData:
    """Regroup the eigenspaces of ``Q(0)`` into Hodge pieces of weight ``w``.

    ``alpha`` goes to ``p = floor(alpha + (w+1)/2)``; eigenvalues on the walls
    ``(w+1)/2 + Z`` are refused.
    """
    if B.U.max_abs() > tol:
        raise PreconditionViolated("U must vanish")
    H = B.metric.constant_part()
    Q = B.Q.constant_part()
    S0 = orthonormal_frame(H)
    Qo = S0 @ Q @ np.linalg.inv(S0)
    values, V = hermitian_eigen(0.5 * (Qo + Qo.conj().T), tol)
    rows = V.conj().T @ S0
    pieces: dict = {}
    for alpha, row in zip(values, rows):
        x = alpha + (w + 1) / 2
        if abs(x - round(x)) <= tol * max(1.0, abs(x)):
            raise EigenvalueOnWall(f"eigenvalue {alpha:.17g} lies on (w+1)/2 + Z", float(alpha))
        pieces.setdefault(int(math.floor(x)), []).append(row)
    pieces = {p: np.array(v) for p, v in pieces.items()}
    grading = [(p, len(pieces[p])) for p in sorted(pieces, reverse=True)]
    A = matrix_exp(2j * math.pi * Q)
    transversality = "vacuous" if all(C.max_abs() <= tol for C in B.higgs) else _transversality(B, pieces, tol)
    vhs = VHSData(w, grading, pieces, np.zeros_like(H), H, A, None, B.kappa, transversality)
    k = sum((-1) ** (p % 2) * vhs.projector(p) @ H @ vhs.projector(p).conj().T for p in pieces)
    S = None
    if B.kappa is not None:
        G = H @ B.kappa.conj().T
        S = (2j * math.pi) ** w * sum((-1) ** (p % 2) * vhs.projector(p) for p in pieces) @ G
    return VHSData(w, grading, pieces, k, H, A, S, B.kappa, transversality)


def _transversality(B, pieces, tol) -> str:
    ps = sorted(pieces)
    for C in B.higgs:
        C0 = C.constant_part()
        for p in ps:
            lower = np.vstack([pieces[q] for q in ps if q >= p - 1])
            image = np.vstack([pieces[q] for q in ps if q >= p]) @ C0
            coef = np.linalg.lstsq(lower.T, image.T, rcond=None)[0]
            if fro(coef.T @ lower - image) > tol * max(1.0, fro(C0)):
                return "fails"
    return "holds"


def polarization_signs(V: VHSData, tol: float = DEFAULT_TOL) -> CheckReport:
    """Symmetry of ``S`` and the sign of ``(2 pi i)^{-w} S(a, kappa a)`` on each piece."""
    rep = CheckReport(tol)
    if V.S is None:
        rep.skip("S-symmetry", "no real structure")
        return rep
    w = V.weight
    S = V.S
    rep.add("S-symmetry", fro(S.T - (-1) ** (w % 2) * S) / max(1.0, fro(S)))
    K = V.kappa
    signs = {}
    for p in sorted(V.pieces, reverse=True):
        a = V.pieces[p]
        # S(a, kappa b) for basis rows a, b of the piece
        M = (a @ S @ K.T @ a.conj().T) / (2j * math.pi) ** w
        rep.add(f"hermitian p={p}", fro(M - M.conj().T) / max(1.0, fro(M)))
        vals = np.linalg.eigvalsh(0.5 * (M + M.conj().T))
        if vals.min() > tol:
            signs[p] = "+"
        elif vals.max() < -tol:
            signs[p] = "-"
        else:
            signs[p] = "0"
        expected = (-1) ** (p % 2) * vals
        rep.add(f"definite p={p}", float(expected.min()), lower_bound=True)
    rep.data["signs"] = {str(p): s for p, s in signs.items()}
    return rep


def roundtrip_check(grading, k_blocks, tol: float = DEFAULT_TOL) -> CheckReport:
    """Grading -> bundle -> weight-0 Hodge pieces; compares dims, ``A`` and ``Q``."""
    grading = _grading_list(grading)
    B = vhs_to_ttstar(grading, k_blocks, tol=tol)
    V = ttstar_to_vhs(B, 0, tol)
    want = Counter()
    for p, d in grading:
        want[p] += d
    got = Counter(dict(V.grading))
    rep = CheckReport(tol)
    keys = set(want) | set(got)
    rep.add("grading", float(sum(abs(want[p] - got[p]) for p in keys)), tol=0.0)
    rep.add("A-identity", fro(V.A - np.eye(B.rank)))
    Q_back = sum(p * V.projector(p) for p in V.pieces)
    rep.add("Q-preserved", fro(Q_back - B.Q.constant_part()))
    rep.data["grading"] = [[p, d] for p, d in V.grading]
    rep.data["transversality"] = V.transversality
    return rep


# ---------------------------------------------------------------------------
# JSON

VHS_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["weight", "grading", "k"],
    "properties": {
        "weight": {"type": "integer"},
        "grading": {
            "type": "array",
            "minItems": 1,
            "items": {"type": "array", "minItems": 2, "maxItems": 2,
                      "prefixItems": [{"type": "integer"}, {"type": "integer", "minimum": 0}]},
        },
        "k": {"type": "array", "items": {"type": "array", "items": {
            "oneOf": [{"type": "number"},
                      {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}]}}},
        "kappa": {"type": "array"},
    },
}


def _cplx(v):
    return complex(v) if not isinstance(v, list) else complex(v[0], v[1])


def load_vhs(raw) -> tuple:
    """Parse VHS JSON into ``(weight, grading, k, kappa)``."""
    doc = parse_json(raw)
    validate(doc, VHS_SCHEMA)
    grading = _grading_list(doc["grading"])
    k = np.array([[_cplx(v) for v in row] for row in doc["k"]], dtype=complex)
    kappa = None
    if "kappa" in doc:
        kappa = np.array([[_cplx(v) for v in row] for row in doc["kappa"]], dtype=complex)
    return doc["weight"], grading, k, kappa


def vhs_to_dict(V: VHSData) -> dict:
    out = {
        "weight": V.weight,
        "grading": [[p, d] for p, d in V.grading],
        "k": matrix_to_json(V.k_form),
        "filtration": [{"p": p, "basis": matrix_to_json(rows)} for p, rows in V.filtration],
        "A": matrix_to_json(V.A),
        "transversality": V.transversality,
    }
    if V.S is not None:
        out["S"] = matrix_to_json(V.S)
    return out
