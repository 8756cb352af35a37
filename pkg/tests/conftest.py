import itertools

import mpmath
import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_complex(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def random_hermitian(rng, n):
    a = random_complex(rng, n, n)
    return 0.5 * (a + a.conj().T)


def random_pd(rng, n):
    a = random_complex(rng, n, n)
    return a @ a.conj().T + n * np.eye(n)


def charpoly_roots(a, dps=40):
    """Eigenvalues as roots of the characteristic polynomial (Faddeev-LeVerrier in mpmath)."""
    mpmath.mp.dps = dps
    n = a.shape[0]
    A = mpmath.matrix([[mpmath.mpc(complex(a[i, j])) for j in range(n)] for i in range(n)])
    M = mpmath.zeros(n)
    coeffs = [mpmath.mpf(1)]
    ident = mpmath.eye(n)
    c = mpmath.mpf(1)
    for k in range(1, n + 1):
        M = A * M + c * ident
        c = -sum((A * M)[i, i] for i in range(n)) / k
        coeffs.append(c)
    roots = mpmath.polyroots(coeffs, maxsteps=200, extraprec=200)
    return np.array([complex(z) for z in roots])


def leibniz_det(a):
    n = a.shape[0]
    total = 0j
    for perm in itertools.permutations(range(n)):
        inversions = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = (-1) ** inversions
        for i in range(n):
            term = term * a[i, perm[i]]
        total += term
    return total


def wirtinger(f, point, i, anti=False, h=1e-5):
    """Numerical d/dt_i (or d/dtb_i) of a function of t by central differences."""
    e = np.zeros(len(point), dtype=complex)
    e[i] = 1.0
    dx = (f(point + h * e) - f(point - h * e)) / (2 * h)
    dy = (f(point + 1j * h * e) - f(point - 1j * h * e)) / (2 * h)
    return 0.5 * (dx + 1j * dy) if anti else 0.5 * (dx - 1j * dy)
