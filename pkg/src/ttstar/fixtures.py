"""Ready-made bundles: generator fixtures and single-identity perturbations."""

from __future__ import annotations

import numpy as np

from .errors import UnknownFixture
from .hodge import exchange_kappa, vhs_to_ttstar
from .jets import Jet
from .model import CVBundleData

GEN_NAMES = ("trivial-r", "takahashi-rank2", "rank3-integers", "rank3-halves", "vhs-weight0-r3")

EPS = 1e-3


def _E(r, j, k):
    m = np.zeros((r, r), dtype=complex)
    m[j, k] = 1.0
    return m


def _exchange(r):
    return np.eye(r, dtype=complex)[::-1]


def _diagonal(qs, weight=0):
    r = len(qs)
    zero = np.zeros((r, r))
    return CVBundleData.constant(np.eye(r), [zero], zero, np.diag(qs), kappa=_exchange(r), weight=weight)


def generate(name: str, *args) -> CVBundleData:
    """Constant fixtures that satisfy every identity, each with a real structure."""
    if name == "trivial-r":
        r = int(args[0]) if args else 1
        if r < 1:
            raise UnknownFixture(f"trivial-r needs a positive rank, got {r}")
        return _diagonal([0.0] * r)
    if name == "takahashi-rank2":
        return _diagonal([0.5, -0.5])
    if name == "rank3-integers":
        return _diagonal([-1.0, 0.0, 1.0])
    if name == "rank3-halves":
        return _diagonal([-0.5, 0.0, 0.5])
    if name == "vhs-weight0-r3":
        grading = [(1, 1), (0, 1), (-1, 1)]
        return vhs_to_ttstar(grading, np.diag([-1.0, 1.0, -1.0]), weight=0, kappa=exchange_kappa(grading))
    raise UnknownFixture(f"unknown fixture {name!r}; choose from {', '.join(GEN_NAMES)}")


# ---------------------------------------------------------------------------
# perturbations: each breaks exactly one identity


def _bundle(metric, higgs, U, Q, m):
    return CVBundleData(metric.shape[0], m, metric, tuple(higgs), U, Q)


def _const(a, m, d=3):
    return Jet.constant(np.asarray(a, dtype=complex), m, d)


def _t(i, m, anti=False, d=3):
    return Jet.variable(i, m, d, anti=anti)


def perturbation(identity: str, eps: float = EPS) -> CVBundleData:
    """Bundle violating only ``identity`` (a harmonic or integrability identity name).

    Terms of total degree two or more in the Higgs field are invisible to the
    curvature check, which is certified through degree one only.
    """
    I2 = np.eye(2)
    Z2 = np.zeros((2, 2))
    if identity == "dbar-Phi":
        C = _t(1, 1, anti=True) * (eps * _E(2, 0, 1))
        return _bundle(_const(I2, 1), [C], _const(Z2, 1), _const(np.diag([1.0, 0.0]), 1), 1)
    if identity == "Phi-wedge-Phi":
        C1 = _t(1, 2) * (eps * _E(3, 0, 1))
        C2 = _t(2, 2) * (eps * _E(3, 1, 2))
        return _bundle(_const(np.eye(3), 2), [C1, C2], _const(np.zeros((3, 3)), 2),
                       _const(np.diag([2.0, 1.0, 0.0]), 2), 2)
    if identity == "Dprime-Phi":
        C1 = _t(2, 2) * (eps * _E(2, 0, 1))
        return _bundle(_const(I2, 2), [C1, _const(Z2, 2)], _const(Z2, 2), _const(np.diag([1.0, 0.0]), 2), 2)
    if identity == "curvature":
        H = _const(I2, 1) + (_t(1, 1) * _t(1, 1, anti=True)) * (eps * I2)
        return _bundle(H, [_const(Z2, 1)], _const(Z2, 1), _const(Z2, 1), 1)
    if identity == "U":
        U = _t(1, 1, anti=True) * (eps * _E(2, 0, 0))
        return _bundle(_const(I2, 1), [_const(Z2, 1)], U, _const(Z2, 1), 1)
    if identity == "QQ":
        return _bundle(_const(I2, 1), [_const(Z2, 1)], _const(Z2, 1), _const(eps * _E(2, 0, 1), 1), 1)
    if identity == "CU":
        C = _t(1, 1) * (eps * _E(2, 0, 1))
        return _bundle(_const(I2, 1), [C], _const(eps * _E(2, 1, 0), 1), _const(np.diag([1.0, 0.0]), 1), 1)
    if identity == "UCQ":
        U = _t(1, 1) * (eps * _E(2, 0, 0))
        return _bundle(_const(I2, 1), [_const(Z2, 1)], U, _const(Z2, 1), 1)
    if identity == "QCU":
        Q = _const(np.diag([1.0, 0.0]), 1) + (_t(1, 1) + _t(1, 1, anti=True)) * (eps * _E(2, 0, 0))
        return _bundle(_const(I2, 1), [_const(Z2, 1)], _const(Z2, 1), Q, 1)
    raise UnknownFixture(f"no perturbation for identity {identity!r}")


PERTURBED_IDENTITIES = ("dbar-Phi", "Phi-wedge-Phi", "Dprime-Phi", "curvature", "U", "QQ", "CU", "UCQ", "QCU")


def perturbed_vhs(eps: float = EPS) -> CVBundleData:
    """The weight-0 rank-3 fixture with ``U[0][0] = eps * t1`` and no real structure."""
    B = generate("vhs-weight0-r3")
    U = _t(1, 1) * (eps * _E(3, 0, 0))
    return B.replace(U=U, kappa=None)


def harmonic_line_pair(a: float = 0.7, degree: int = 3) -> CVBundleData:
    """Harmonic but non-flat rank-2 bundle on a disc.

    ``h = diag(y, 1/y)`` with ``y = a (1 - t tb)`` and ``C = a E12``; the
    curvature of ``D'`` is balanced by ``[C, C^dagger]``.  ``Q = diag(1/2, -1/2)``
    and ``U = 0``.
    """
    t, tb = _t(1, 1, d=degree), _t(1, 1, anti=True, d=degree)
    y = a * (Jet.constant(1.0, 1, degree) - t * tb)
    y_inv = Jet.constant(1.0 / a, 1, degree)
    u = t * tb
    power = Jet.constant(1.0, 1, degree)
    for _ in range(degree):
        power = power * u
        y_inv = y_inv + power * (1.0 / a)
    H = y * _E(2, 0, 0) + y_inv * _E(2, 1, 1)
    C = Jet.constant(a * _E(2, 0, 1), 1, degree)
    zero = Jet.zero(1, degree, (2, 2))
    Q = Jet.constant(np.diag([0.5, -0.5]), 1, degree)
    return CVBundleData(2, 1, H, (C,), zero, Q, jet_degree=degree)
