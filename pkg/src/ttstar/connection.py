"""The z-direction of the structure connection on one fiber, and its monodromy.

On the fiber over a point the structure connection restricts to
``d - A(z) dz/z`` with

    A(z) = polar / z + A0 + sum_k Apoly[k] z^(k+1)

where ``polar = U``, ``A0 = -Q (+ w/2 I)`` and ``Apoly = [-U^dagger]``.
Horizontal sections are solution columns of ``dY/dz = A(z) Y / z``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import MissingWeight, NotDecomposable, PreconditionViolated, StepCountTooSmall
from .linalg import DEFAULT_TOL, as_cmatrix, fro, h_adjoint, matrix_exp
from .model import CVBundleData
from .spectrum import SpectrumReport

MIN_STEPS = 256


@dataclass(frozen=True)
class FiberConnection:
    A0: np.ndarray
    polar: np.ndarray | None = None
    Apoly: tuple = ()
    weight: int | None = None
    includes_weight_shift: bool = False

    @property
    def rank(self) -> int:
        return self.A0.shape[0]

    def is_constant(self, tol: float = 0.0) -> bool:
        extra = [self.polar] if self.polar is not None else []
        return all(fro(a) <= tol for a in (*extra, *self.Apoly))

    def __call__(self, z: complex) -> np.ndarray:
        out = np.array(self.A0, dtype=complex)
        if self.polar is not None:
            out = out + self.polar / z
        for k, a in enumerate(self.Apoly, start=1):
            out = out + a * z**k
        return out


@dataclass(frozen=True)
class Monodromy:
    T: np.ndarray
    method: str
    steps: int | None = None
    residual: float | None = None
    trace_A0: complex = 0.0

    def liouville_defect(self) -> float:
        """``|det T - exp(2 pi i tr A0)|``."""
        return abs(np.linalg.det(self.T) - np.exp(2j * math.pi * self.trace_A0))


def assemble(B: CVBundleData, p=None, with_weight: bool = False) -> FiberConnection:
    """Fiber connection of ``B`` at the point ``p`` (default: origin)."""
    if with_weight and B.weight is None:
        raise MissingWeight("weight shift requested but the bundle has no weight")
    p = np.zeros(B.dim) if p is None else p
    Q, U, H = B.Q.evaluate(p), B.U.evaluate(p), B.metric.evaluate(p)
    A0 = -Q
    if with_weight:
        A0 = A0 + 0.5 * B.weight * np.eye(B.rank)
    return FiberConnection(A0, U, (-h_adjoint(U, H),), B.weight, with_weight)


@dataclass(frozen=True)
class LineConnection:
    """One summand ``d - residue dz/z``; ``exponent`` is ``eigenvalue + w/2``."""

    eigenvalue: float
    exponent: float
    residue: float


def line_decomposition(L: SpectrumReport, w: int, bundle: CVBundleData | None = None,
                       tol: float = DEFAULT_TOL) -> list[LineConnection]:
    """Split the weight-shifted fiber connection into line bundles.

    When ``bundle`` is given, its Higgs field and ``U`` must vanish.
    """
    if bundle is not None:
        size = max([bundle.U.max_abs()] + [C.max_abs() for C in bundle.higgs])
        if size > tol:
            raise NotDecomposable(f"U or Phi does not vanish (size {size:.3g})")
    return [LineConnection(float(lam), float(lam) + w / 2, -float(lam) + w / 2) for lam in L.eigenvalues]


def direct_sum(lines, weight: int | None = None) -> FiberConnection:
    A0 = np.diag([ln.residue for ln in lines]).astype(complex)
    return FiberConnection(A0, None, (), weight, weight is not None)


def monodromy_closed(A0) -> Monodromy:
    """``T = exp(2 pi i A0)``, valid for a connection constant in ``z``."""
    if isinstance(A0, FiberConnection):
        if not A0.is_constant():
            raise PreconditionViolated("closed form needs a connection without polar or polynomial terms")
        A0 = A0.A0
    A0 = as_cmatrix(A0)
    return Monodromy(matrix_exp(2j * math.pi * A0), "closed-form", trace_A0=complex(np.trace(A0)))


def monodromy_numeric(F: FiberConnection, steps: int = 4096) -> Monodromy:
    """Transport the identity once counterclockwise around ``|z| = 1`` by RK4.

    With ``z = exp(i theta)`` the system is ``dY/dtheta = i A(z) Y``.
    """
    if steps < MIN_STEPS:
        raise StepCountTooSmall(f"need at least {MIN_STEPS} steps, got {steps}")
    h = 2 * math.pi / steps
    r = F.rank
    constant = F.is_constant()

    if constant:
        M = 1j * F.A0

        def rhs(theta, Y):
            return M @ Y
    else:
        def rhs(theta, Y):
            return 1j * F(complex(math.cos(theta), math.sin(theta))) @ Y

    Y = np.eye(r, dtype=complex)
    for n in range(steps):
        th = n * h
        k1 = rhs(th, Y)
        k2 = rhs(th + h / 2, Y + (h / 2) * k1)
        k3 = rhs(th + h / 2, Y + (h / 2) * k2)
        k4 = rhs(th + h, Y + h * k3)
        Y = Y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    residual = fro(Y - matrix_exp(2j * math.pi * F.A0)) if constant else None
    return Monodromy(Y, "numeric", steps, residual, complex(np.trace(F.A0)))
