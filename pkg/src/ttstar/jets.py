"""Truncated polynomial (jet) fields on a coordinate patch.

A :class:`Jet` is a polynomial in the independent formal variables
``t1..tm, tb1..tbm`` (``tb`` standing for the conjugate coordinate) whose
coefficients are arrays of a fixed shape.  Scalar jets (shape ``()``) play the
role of function germs, two-dimensional shapes the role of matrix fields.
Every product is truncated at the total degree ``degree``.

Monomials are tuples ``(a_1..a_m, b_1..b_m)`` of exponents.  Coordinate
indices in the public derivative API are 1-based, matching the variable names.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import DimensionMismatch, IndexOutOfRange, NotPositiveDefinite
from .linalg import DEFAULT_TOL, is_positive_definite

DEFAULT_DEGREE = 3


def _deg(mono) -> int:
    return sum(mono)


class Jet:
    __slots__ = ("m", "degree", "shape", "_terms")

    def __init__(self, m: int, degree: int, shape=(), terms: Mapping | None = None):
        self.m = int(m)
        self.degree = int(degree)
        self.shape = tuple(shape)
        clean = {}
        for mono, c in (terms or {}).items():
            mono = tuple(int(e) for e in mono)
            if len(mono) != 2 * self.m:
                raise DimensionMismatch(f"monomial {mono} does not have {2 * self.m} exponents")
            if _deg(mono) > self.degree:
                continue
            c = np.asarray(c, dtype=complex)
            if c.shape != self.shape:
                c = np.broadcast_to(c, self.shape)
            if not np.any(c):
                continue
            if mono in clean:
                clean[mono] = clean[mono] + c
            else:
                clean[mono] = np.array(c)
        self._terms = clean

    # construction -----------------------------------------------------

    @classmethod
    def zero(cls, m: int, degree: int = DEFAULT_DEGREE, shape=()) -> "Jet":
        return cls(m, degree, shape)

    @classmethod
    def constant(cls, value, m: int, degree: int = DEFAULT_DEGREE) -> "Jet":
        value = np.asarray(value, dtype=complex)
        return cls(m, degree, value.shape, {(0,) * (2 * m): value})

    @classmethod
    def identity(cls, r: int, m: int, degree: int = DEFAULT_DEGREE) -> "Jet":
        return cls.constant(np.eye(r), m, degree)

    @classmethod
    def variable(cls, i: int, m: int, degree: int = DEFAULT_DEGREE, anti: bool = False) -> "Jet":
        """The coordinate ``t_i`` (or ``tb_i`` when ``anti``) as a scalar jet."""
        _check_index(i, m)
        mono = [0] * (2 * m)
        mono[(m if anti else 0) + i - 1] = 1
        return cls(m, degree, (), {tuple(mono): 1.0})

    @classmethod
    def from_entries(cls, rows: Iterable[Iterable["Jet"]]) -> "Jet":
        rows = [list(r) for r in rows]
        first = rows[0][0]
        shape = (len(rows), len(rows[0]))
        terms: dict = {}
        for j, row in enumerate(rows):
            if len(row) != shape[1]:
                raise DimensionMismatch("ragged matrix of jets")
            for k, e in enumerate(row):
                if e.shape != () or e.m != first.m or e.degree != first.degree:
                    raise DimensionMismatch("entries must be scalar jets sharing m and degree")
                for mono, c in e._terms.items():
                    block = terms.setdefault(mono, np.zeros(shape, dtype=complex))
                    block[j, k] += c
        return cls(first.m, first.degree, shape, terms)

    # access -----------------------------------------------------------

    @property
    def terms(self) -> dict:
        return {mono: c.copy() for mono, c in self._terms.items()}

    def items(self):
        return self._terms.items()

    def coeff(self, mono) -> np.ndarray:
        c = self._terms.get(tuple(mono))
        return np.zeros(self.shape, dtype=complex) if c is None else c.copy()

    def constant_part(self) -> np.ndarray:
        return self.coeff((0,) * (2 * self.m))

    def entry(self, j: int, k: int) -> "Jet":
        return Jet(self.m, self.degree, (), {mono: c[j, k] for mono, c in self._terms.items()})

    def is_constant(self) -> bool:
        return all(_deg(mono) == 0 for mono in self._terms)

    def is_holomorphic(self) -> bool:
        return all(not any(mono[self.m:]) for mono in self._terms)

    def by_degree(self, upto: int | None = None) -> list[float]:
        """Largest coefficient (Frobenius) norm in each total degree ``0..upto``."""
        upto = self.degree if upto is None else min(upto, self.degree)
        out = [0.0] * (upto + 1)
        for mono, c in self._terms.items():
            k = _deg(mono)
            if k <= upto:
                out[k] = max(out[k], float(np.linalg.norm(c)))
        return out

    def max_abs(self, upto: int | None = None) -> float:
        return max(self.by_degree(upto), default=0.0)

    def evaluate(self, t, tbar=None) -> np.ndarray | complex:
        t = np.asarray(t, dtype=complex).reshape(self.m)
        tbar = np.conj(t) if tbar is None else np.asarray(tbar, dtype=complex).reshape(self.m)
        point = np.concatenate([t, tbar])
        out = np.zeros(self.shape, dtype=complex)
        for mono, c in self._terms.items():
            out = out + c * np.prod(point ** np.asarray(mono))
        return out if self.shape else complex(out)

    def truncate(self, k: int) -> "Jet":
        return Jet(self.m, self.degree, self.shape, {mo: c for mo, c in self._terms.items() if _deg(mo) <= k})

    # algebra ----------------------------------------------------------

    def _compatible(self, other: "Jet") -> None:
        if self.m != other.m or self.degree != other.degree:
            raise DimensionMismatch("jets must share base dimension and degree")

    def _lift(self, other) -> "Jet":
        if isinstance(other, Jet):
            self._compatible(other)
            return other
        return Jet.constant(other, self.m, self.degree)

    def __add__(self, other):
        other = self._lift(other)
        if other.shape != self.shape:
            raise DimensionMismatch(f"cannot add shapes {self.shape} and {other.shape}")
        terms = self.terms
        for mono, c in other._terms.items():
            terms[mono] = terms[mono] + c if mono in terms else c
        return Jet(self.m, self.degree, self.shape, terms)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.m, self.degree, self.shape, {mo: -c for mo, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        """Coefficientwise product with broadcasting (scalar jets, numbers)."""
        if not isinstance(other, Jet):
            other = np.asarray(other, dtype=complex)
            return Jet(self.m, self.degree, np.broadcast_shapes(self.shape, other.shape),
                       {mo: c * other for mo, c in self._terms.items()})
        self._compatible(other)
        shape = np.broadcast_shapes(self.shape, other.shape)
        return self._product(other, shape, lambda a, b: a * b)

    __rmul__ = __mul__

    def __matmul__(self, other):
        other = self._lift(other)
        if len(self.shape) != 2 or len(other.shape) != 2 or self.shape[1] != other.shape[0]:
            raise DimensionMismatch(f"cannot multiply fields of shapes {self.shape} and {other.shape}")
        return self._product(other, (self.shape[0], other.shape[1]), lambda a, b: a @ b)

    def __rmatmul__(self, other):
        return self._lift(other) @ self

    def _product(self, other: "Jet", shape, op) -> "Jet":
        d = self.degree
        terms: dict = {}
        right = [(mo, _deg(mo), c) for mo, c in other._terms.items()]
        for ma, c_a in self._terms.items():
            da = _deg(ma)
            for mb, db, c_b in right:
                if da + db > d:
                    continue
                mono = tuple(x + y for x, y in zip(ma, mb))
                prod = op(c_a, c_b)
                terms[mono] = terms[mono] + prod if mono in terms else prod
        return Jet(self.m, d, shape, terms)

    def commutator(self, other: "Jet") -> "Jet":
        return self @ other - other @ self

    def conj(self) -> "Jet":
        """Complex conjugate field: conjugate coefficients and swap ``t`` with ``tb``."""
        m = self.m
        return Jet(m, self.degree, self.shape,
                   {mo[m:] + mo[:m]: np.conj(c) for mo, c in self._terms.items()})

    @property
    def T(self) -> "Jet":
        return Jet(self.m, self.degree, self.shape[::-1], {mo: c.T for mo, c in self._terms.items()})

    @property
    def H(self) -> "Jet":
        return self.conj().T

    def inv(self) -> "Jet":
        """Inverse of a square matrix field with invertible constant term."""
        if len(self.shape) != 2 or self.shape[0] != self.shape[1]:
            raise DimensionMismatch("only square matrix fields can be inverted")
        c0 = self.constant_part()
        c0_inv = np.linalg.inv(c0)
        nilp = Jet.constant(-c0_inv, self.m, self.degree) @ (self - Jet.constant(c0, self.m, self.degree))
        total = Jet.constant(c0_inv, self.m, self.degree)
        power = Jet.identity(self.shape[0], self.m, self.degree)
        for _ in range(self.degree):
            power = power @ nilp
            total = total + power @ Jet.constant(c0_inv, self.m, self.degree)
        return total

    def _derive(self, slot: int) -> "Jet":
        terms = {}
        for mono, c in self._terms.items():
            e = mono[slot]
            if e:
                lowered = list(mono)
                lowered[slot] -= 1
                terms[tuple(lowered)] = c * e
        return Jet(self.m, self.degree, self.shape, terms)

    def allclose(self, other: "Jet", tol: float = 1e-12, upto: int | None = None) -> bool:
        return (self - other).max_abs(upto) <= tol

    def __repr__(self) -> str:
        return f"Jet(m={self.m}, degree={self.degree}, shape={self.shape}, terms={len(self._terms)})"


# Aliases documenting intent at call sites.
JetPoly = Jet
MatrixField = Jet


def _check_index(i: int, m: int) -> None:
    if not (1 <= i <= m):
        raise IndexOutOfRange(f"coordinate index {i} outside 1..{m}")


def d_holo(f: Jet, i: int) -> Jet:
    """Formal partial derivative with respect to ``t_i`` (1-based)."""
    _check_index(i, f.m)
    return f._derive(i - 1)


def d_anti(f: Jet, i: int) -> Jet:
    """Formal partial derivative with respect to ``tb_i`` (1-based)."""
    _check_index(i, f.m)
    return f._derive(f.m + i - 1)


def field_mul(A: Jet, B: Jet) -> Jet:
    return A @ B


def monomials(m: int, degree: int):
    """All exponent tuples over ``2m`` variables of total degree ``<= degree``."""
    for mono in itertools.product(range(degree + 1), repeat=2 * m):
        if sum(mono) <= degree:
            yield mono


def field_h_adjoint(P: Jet, H: Jet) -> Jet:
    """Fieldwise ``h``-adjoint ``H P^* H^{-1}``."""
    return H @ P.H @ H.inv()


# ---------------------------------------------------------------------------
# Chern connection and derived quantities


@dataclass(frozen=True)
class ConnectionData:
    """Connection matrices of ``D'`` in a holomorphic frame, one per ``d/dt_i``.

    ``D'_i`` acts on coordinate rows by ``x -> d_i x + x A_i``.
    """

    A: tuple
    frame_is_holomorphic: bool = True

    @property
    def m(self) -> int:
        return len(self.A)

    @classmethod
    def flat(cls, r: int, m: int, degree: int = DEFAULT_DEGREE) -> "ConnectionData":
        return cls(tuple(Jet.zero(m, degree, (r, r)) for _ in range(m)))


def chern_connection(H: Jet, tol: float = DEFAULT_TOL) -> ConnectionData:
    """(1,0)-part of the Chern connection of the metric field ``H``.

    In a holomorphic frame, compatibility ``d_i h(e_j, e_k) = h(D'_i e_j, e_k)``
    gives ``A_i = (d_i H) H^{-1}``; the result is exact through degree
    ``degree - 1``.
    """
    if not is_positive_definite(H.constant_part(), tol):
        raise NotPositiveDefinite("metric is not positive definite at the origin")
    Hinv = H.inv()
    return ConnectionData(tuple(d_holo(H, i) @ Hinv for i in range(1, H.m + 1)))


def metric_compatibility_residual(conn: ConnectionData, H: Jet) -> float:
    return max((d_holo(H, i) - conn.A[i - 1] @ H).max_abs(H.degree - 1) for i in range(1, H.m + 1))


def covariant_d(conn: ConnectionData, P: Jet) -> list[Jet]:
    """Components ``D'_i P = d_i P + P A_i - A_i P`` for an endomorphism field."""
    if len(P.shape) != 2 or any(A.shape != P.shape for A in conn.A):
        raise DimensionMismatch("endomorphism and connection sizes differ")
    return [d_holo(P, i) + P @ A - A @ P for i, A in enumerate(conn.A, start=1)]


@dataclass(frozen=True)
class FieldResidual:
    """Per-degree maxima of a residual field, certified through ``certified_degree``."""

    by_degree: tuple
    certified_degree: int

    @property
    def max(self) -> float:
        return max(self.by_degree, default=0.0)


def _collect(fields: Iterable[Jet], upto: int) -> FieldResidual:
    upto = max(upto, 0)
    best = [0.0] * (upto + 1)
    for f in fields:
        for k, v in enumerate(f.by_degree(upto)):
            best[k] = max(best[k], v)
    return FieldResidual(tuple(best), upto)


def curvature_fields(conn: ConnectionData, higgs, H: Jet) -> dict:
    """Components of ``(D'dbar + dbar D') + (Phi Phi^+ + Phi^+ Phi)`` on ``dt_i ^ dtb_j``.

    With the row convention the ``(i, j)`` component is
    ``dbar_j A_i + [C_i, C_j^+]``.
    """
    if len(higgs) != conn.m:
        raise DimensionMismatch("one Higgs matrix per coordinate direction is required")
    if any(C.shape != H.shape for C in higgs) or any(A.shape != H.shape for A in conn.A):
        raise DimensionMismatch("curvature data sizes differ")
    daggers = [field_h_adjoint(C, H) for C in higgs]
    out = {}
    for i, A in enumerate(conn.A, start=1):
        for j in range(1, conn.m + 1):
            out[(i, j)] = d_anti(A, j) + higgs[i - 1].commutator(daggers[j - 1])
    return out


def curvature_residual(conn: ConnectionData, higgs, H: Jet) -> FieldResidual:
    """Harmonicity defect, certified through degree ``degree - 2``."""
    return _collect(curvature_fields(conn, higgs, H).values(), H.degree - 2)
