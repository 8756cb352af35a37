"""Bundle data, identity checkers and JSON (de)serialization.

A bundle is stored in one holomorphic frame.  ``higgs[i]`` is the matrix
``C_i`` of ``-Phi`` in direction ``d/dt_i`` (so that ``X o Y = -Phi_X Y`` has
structure constants ``C``); all matrices follow the row convention of
:mod:`ttstar.linalg`.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any

import jsonschema
import numpy as np

from .errors import (
    DimensionMismatch,
    InvariantViolation,
    MissingRealStructure,
    NotPositiveDefinite,
    ParseError,
    SchemaError,
)
from .jets import DEFAULT_DEGREE, Jet, chern_connection, covariant_d, curvature_residual, field_h_adjoint
from .linalg import DEFAULT_TOL, fro, is_positive_definite

HARMONIC_IDENTITIES = ("dbar-Phi", "Phi-wedge-Phi", "Dprime-Phi", "curvature")
INTEGRABLE_IDENTITIES = ("U", "QQ", "CU", "UCQ", "QCU")
REAL_IDENTITIES = ("kappa-involution", "kappa-metric", "kappa-flat", "U-symmetry", "Q-antisymmetry")


# ---------------------------------------------------------------------------
# reports


@dataclass
class Residual:
    value: float
    tol: float
    by_degree: tuple = ()
    certified_degree: int | None = None
    skipped: bool = False
    note: str = ""
    # margins must stay above tol instead of below it
    lower_bound: bool = False

    @property
    def passed(self) -> bool:
        if self.skipped:
            return True
        return self.value > self.tol if self.lower_bound else self.value <= self.tol

    def to_dict(self) -> dict:
        out = {"value": self.value, "tol": self.tol, "passed": self.passed}
        if self.by_degree:
            out["by_degree"] = list(self.by_degree)
        if self.certified_degree is not None:
            out["certified_degree"] = self.certified_degree
        if self.skipped:
            out["skipped"] = True
        if self.note:
            out["note"] = self.note
        if self.lower_bound:
            out["lower_bound"] = True
        return out


@dataclass
class CheckReport:
    """Named residuals with a pass/fail verdict (skipped entries do not count)."""

    tol: float = DEFAULT_TOL
    residuals: dict = field(default_factory=dict)
    data: dict = field(default_factory=dict)

    def add(self, name: str, value: float, by_degree=(), certified_degree=None, tol=None, note="",
            lower_bound=False) -> Residual:
        r = Residual(float(value), self.tol if tol is None else tol, tuple(float(v) for v in by_degree),
                     certified_degree, note=note, lower_bound=lower_bound)
        self.residuals[name] = r
        return r

    def skip(self, name: str, note: str) -> None:
        self.residuals[name] = Residual(0.0, self.tol, skipped=True, note=note)

    @property
    def verdict(self) -> bool:
        return all(r.passed for r in self.residuals.values())

    @property
    def failures(self) -> list[str]:
        return [name for name, r in self.residuals.items() if not r.passed]

    def merge(self, other: "CheckReport") -> "CheckReport":
        out = CheckReport(self.tol, dict(self.residuals), dict(self.data))
        out.residuals.update(other.residuals)
        out.data.update(other.data)
        return out

    def to_dict(self) -> dict:
        return {
            "verdict": "pass" if self.verdict else "fail",
            "tol": self.tol,
            "residuals": {k: r.to_dict() for k, r in self.residuals.items()},
            "data": self.data,
        }

    def to_text(self) -> str:
        lines = []
        for name, r in self.residuals.items():
            if r.skipped:
                lines.append(f"  {name:<18} skipped  ({r.note})")
                continue
            status = "ok  " if r.passed else "FAIL"
            bound = "must exceed" if r.lower_bound else "tol"
            extra = f"  [through degree {r.certified_degree}]" if r.certified_degree is not None else ""
            lines.append(f"  {name:<18} {status} {r.value:.17g} ({bound} {r.tol:.3g}){extra}")
        lines.append(f"verdict: {'pass' if self.verdict else 'fail'}")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# bundle data


@dataclass(frozen=True)
class CVBundleData:
    rank: int
    dim: int
    metric: Jet
    higgs: tuple
    U: Jet
    Q: Jet
    kappa: np.ndarray | None = None
    weight: int | None = None
    jet_degree: int = DEFAULT_DEGREE

    def __post_init__(self):
        r, m, d = self.rank, self.dim, self.jet_degree
        if r < 1 or m < 1 or d < 0:
            raise InvariantViolation("rank", "rank and dim must be positive, jet_degree non-negative")
        object.__setattr__(self, "higgs", tuple(self.higgs))
        if len(self.higgs) != m:
            raise InvariantViolation("higgs", f"expected {m} matrices, got {len(self.higgs)}")
        named = [("metric", self.metric), ("U", self.U), ("Q", self.Q)]
        named += [(f"higgs[{i}]", C) for i, C in enumerate(self.higgs)]
        for name, f in named:
            if not isinstance(f, Jet) or f.shape != (r, r) or f.m != m or f.degree != d:
                raise InvariantViolation(name, f"must be an {r}x{r} field over {m} coordinates at degree {d}")
        if (self.metric - self.metric.H).max_abs() > DEFAULT_TOL * max(1.0, self.metric.max_abs()):
            raise InvariantViolation("metric", "not Hermitian")
        if not is_positive_definite(self.metric.constant_part()):
            raise InvariantViolation("metric", "not positive definite at the origin")
        if self.kappa is not None:
            K = np.asarray(self.kappa, dtype=complex)
            if K.shape != (r, r):
                raise InvariantViolation("kappa", f"must be {r}x{r}")
            object.__setattr__(self, "kappa", K)

    @classmethod
    def constant(cls, metric, higgs, U, Q, kappa=None, weight=None, jet_degree=DEFAULT_DEGREE) -> "CVBundleData":
        """Bundle whose fields are all constant in the frame."""
        metric = np.asarray(metric, dtype=complex)
        m = len(higgs)
        lift = lambda a: Jet.constant(np.asarray(a, dtype=complex), m, jet_degree)  # noqa: E731
        return cls(metric.shape[0], m, lift(metric), tuple(lift(C) for C in higgs), lift(U), lift(Q),
                   kappa, weight, jet_degree)

    def connection(self):
        return chern_connection(self.metric)

    def replace(self, **changes) -> "CVBundleData":
        fields = dict(rank=self.rank, dim=self.dim, metric=self.metric, higgs=self.higgs, U=self.U,
                      Q=self.Q, kappa=self.kappa, weight=self.weight, jet_degree=self.jet_degree)
        fields.update(changes)
        return CVBundleData(**fields)


# ---------------------------------------------------------------------------
# checkers


def _anti_part(f: Jet) -> Jet:
    m = f.m
    return Jet(m, f.degree, f.shape, {mo: c for mo, c in f.items() if any(mo[m:])})


def _worst(fields, upto):
    best = [0.0] * (max(upto, 0) + 1)
    for f in fields:
        for k, v in enumerate(f.by_degree(upto)):
            best[k] = max(best[k], v)
    return best


def _record(report: CheckReport, name: str, fields, upto: int) -> None:
    by_deg = _worst(fields, upto)
    report.add(name, max(by_deg), by_deg, upto)


def check_harmonic(B: CVBundleData, tol: float = DEFAULT_TOL) -> CheckReport:
    d, m = B.jet_degree, B.dim
    rep = CheckReport(tol)
    conn = B.connection()
    _record(rep, "dbar-Phi", [_anti_part(C) for C in B.higgs], d)
    _record(rep, "Phi-wedge-Phi",
            [B.higgs[i].commutator(B.higgs[j]) for i in range(m) for j in range(i + 1, m)], d)
    dphi = [covariant_d(conn, C) for C in B.higgs]  # dphi[j][i] = D'_i C_j
    _record(rep, "Dprime-Phi",
            [dphi[j][i] - dphi[i][j] for i in range(m) for j in range(i + 1, m)], d - 1)
    curv = curvature_residual(conn, B.higgs, B.metric)
    rep.add("curvature", curv.max, curv.by_degree, curv.certified_degree)
    return rep


def check_integrable(B: CVBundleData, tol: float = DEFAULT_TOL) -> CheckReport:
    d, r = B.jet_degree, B.rank
    rep = CheckReport(tol)
    conn = B.connection()
    H, U, Q = B.metric, B.U, B.Q
    ident = Jet.identity(r, B.dim, d)
    _record(rep, "U", [_anti_part(U)], d)
    _record(rep, "QQ", [Q - field_h_adjoint(Q, H)], d)
    _record(rep, "CU", [C.commutator(U) for C in B.higgs], d)
    dU = covariant_d(conn, U)
    _record(rep, "UCQ", [dU[i] - (C @ Q - (Q - ident) @ C) for i, C in enumerate(B.higgs)], d - 1)
    dQ = covariant_d(conn, Q)
    U_dag = field_h_adjoint(U, H)
    _record(rep, "QCU", [dQ[i] + C.commutator(U_dag) for i, C in enumerate(B.higgs)], d - 1)
    return rep


def check_real(B: CVBundleData, tol: float = DEFAULT_TOL) -> CheckReport:
    if B.kappa is None:
        raise MissingRealStructure("bundle has no real structure")
    d, r, m = B.jet_degree, B.rank, B.dim
    K = B.kappa
    rep = CheckReport(tol)
    inv = fro(K @ K.conj() - np.eye(r))
    rep.add("kappa-involution", inv)
    H = B.metric
    Kf = Jet.constant(K, m, d)
    _record(rep, "kappa-metric", [Kf @ H @ Kf.H - H.conj()], d)
    conn = B.connection()
    _record(rep, "kappa-flat", [Kf @ A for A in conn.A], d - 1)
    if inv > tol:
        note = "kappa is not an involution"
        rep.skip("U-symmetry", note)
        rep.skip("Q-antisymmetry", note)
        rep.data["error"] = "InvalidRealStructure"
        return rep
    G = H @ Kf.H
    G_inv_T = G.inv().T

    def g_adj(P):
        return G.T @ P.T @ G_inv_T

    _record(rep, "U-symmetry", [g_adj(B.U) - B.U], d)
    _record(rep, "Q-antisymmetry", [g_adj(B.Q) + B.Q], d)
    return rep


def full_report(B: CVBundleData, tol: float = DEFAULT_TOL) -> CheckReport:
    rep = check_harmonic(B, tol).merge(check_integrable(B, tol))
    if B.kappa is not None:
        rep = rep.merge(check_real(B, tol))
    else:
        for name in REAL_IDENTITIES:
            rep.skip(name, "no real structure")
    rep.data.update(rank=B.rank, dim=B.dim, jet_degree=B.jet_degree)
    return rep


# ---------------------------------------------------------------------------
# JSON

_NUMBER = {"type": "number"}
_COMPLEX = {"oneOf": [_NUMBER, {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2}]}
_ENTRY = {
    "oneOf": [
        _COMPLEX,
        {
            "type": "object",
            "additionalProperties": False,
            "required": ["terms"],
            "properties": {
                "terms": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["mono", "c"],
                        "properties": {
                            "mono": {
                                "type": "object",
                                "patternProperties": {"^tb?[1-9][0-9]*$": {"type": "integer", "minimum": 0}},
                                "additionalProperties": False,
                            },
                            "c": _COMPLEX,
                        },
                    },
                }
            },
        },
    ]
}
_MATRIX = {"type": "array", "minItems": 1, "items": {"type": "array", "minItems": 1, "items": _ENTRY}}

BUNDLE_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["rank", "dim", "metric", "higgs", "U", "Q"],
    "properties": {
        "rank": {"type": "integer", "minimum": 1},
        "dim": {"type": "integer", "minimum": 1},
        "weight": {"type": "integer"},
        "jet_degree": {"type": "integer", "minimum": 0},
        "metric": _MATRIX,
        "higgs": {"type": "array", "items": _MATRIX},
        "U": _MATRIX,
        "Q": _MATRIX,
        "kappa": {"type": "array", "items": {"type": "array", "items": _COMPLEX}},
    },
}

_VAR = re.compile(r"^(tb?)([1-9][0-9]*)$")


def _complex(v) -> complex:
    return complex(v) if not isinstance(v, list) else complex(v[0], v[1])


def parse_json(raw) -> Any:
    if isinstance(raw, (bytes, bytearray)):
        try:
            raw = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"input is not UTF-8: {exc}") from exc
    try:
        return json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc}") from exc


def validate(doc, schema) -> None:
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as exc:
        path = list(exc.absolute_path)
        name = str(path[0]) if path else None
        raise SchemaError(f"{'/'.join(map(str, path)) or '<root>'}: {exc.message}", name) from exc


def _field(rows, name: str, r: int, m: int, d: int) -> Jet:
    if len(rows) != r or any(len(row) != r for row in rows):
        raise SchemaError(f"{name}: expected a {r}x{r} matrix", name)
    terms: dict = {}
    for j, row in enumerate(rows):
        for k, entry in enumerate(row):
            items = entry["terms"] if isinstance(entry, dict) else [{"mono": {}, "c": entry}]
            for term in items:
                mono = [0] * (2 * m)
                for var, e in term["mono"].items():
                    kind, idx = _VAR.match(var).groups()
                    idx = int(idx)
                    if idx > m:
                        raise SchemaError(f"{name}: variable {var} exceeds dim {m}", name)
                    mono[(m if kind == "tb" else 0) + idx - 1] += e
                block = terms.setdefault(tuple(mono), np.zeros((r, r), dtype=complex))
                block[j, k] += _complex(term["c"])
    return Jet(m, d, (r, r), terms)


def from_dict(doc: dict) -> CVBundleData:
    validate(doc, BUNDLE_SCHEMA)
    r, m = doc["rank"], doc["dim"]
    d = doc.get("jet_degree", DEFAULT_DEGREE)
    if len(doc["higgs"]) != m:
        raise SchemaError(f"higgs: expected {m} matrices", "higgs")
    kappa = None
    if "kappa" in doc:
        rows = doc["kappa"]
        if len(rows) != r or any(len(row) != r for row in rows):
            raise SchemaError(f"kappa: expected a {r}x{r} matrix", "kappa")
        kappa = np.array([[_complex(v) for v in row] for row in rows])
    try:
        return CVBundleData(
            rank=r, dim=m, jet_degree=d, weight=doc.get("weight"), kappa=kappa,
            metric=_field(doc["metric"], "metric", r, m, d),
            higgs=tuple(_field(C, "higgs", r, m, d) for C in doc["higgs"]),
            U=_field(doc["U"], "U", r, m, d),
            Q=_field(doc["Q"], "Q", r, m, d),
        )
    except (DimensionMismatch, NotPositiveDefinite) as exc:
        raise InvariantViolation("metric", str(exc)) from exc


def load(raw) -> CVBundleData:
    """Parse and validate a bundle from JSON text or bytes."""
    return from_dict(parse_json(raw))


def _num(z: complex) -> list:
    return [float(z.real), float(z.imag)]


def matrix_to_json(a) -> list:
    return [[_num(complex(v)) for v in row] for row in np.asarray(a)]


def field_to_json(f: Jet) -> list:
    if f.is_constant():
        return matrix_to_json(f.constant_part())
    m = f.m
    rows = []
    for j in range(f.shape[0]):
        row = []
        for k in range(f.shape[1]):
            terms = []
            for mono, c in sorted(f.items()):
                if c[j, k] == 0:
                    continue
                names = {f"t{i + 1}": e for i, e in enumerate(mono[:m]) if e}
                names.update({f"tb{i + 1}": e for i, e in enumerate(mono[m:]) if e})
                terms.append({"mono": names, "c": _num(c[j, k])})
            row.append({"terms": terms})
        rows.append(row)
    return rows


def to_dict(B: CVBundleData) -> dict:
    doc = {"rank": B.rank, "dim": B.dim}
    if B.weight is not None:
        doc["weight"] = B.weight
    doc["jet_degree"] = B.jet_degree
    doc["metric"] = field_to_json(B.metric)
    doc["higgs"] = [field_to_json(C) for C in B.higgs]
    doc["U"] = field_to_json(B.U)
    doc["Q"] = field_to_json(B.Q)
    if B.kappa is not None:
        doc["kappa"] = matrix_to_json(B.kappa)
    return doc


def dump(B: CVBundleData) -> str:
    return json.dumps(to_dict(B), indent=1)
