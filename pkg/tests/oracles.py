"""Independent reference computations used by the tests.

Nothing here imports the package's numerical code: each oracle follows a
different route (extended precision, brute force, closed forms) from the
implementation it checks.
"""
from __future__ import annotations

import itertools
from fractions import Fraction

import mpmath as mp
import numpy as np


def ml_series(alpha, beta, z, dps=None, terms=None):
    """E_{alpha,beta}(z) from the defining series in extended precision.

    The arguments alpha k + beta are formed in mpmath so that rounding is not
    amplified by the cancellation between terms; precision and length grow
    with the size of the largest term.
    """
    r = abs(complex(z))
    peak = r ** (1.0 / alpha) if r > 0 else 0.0  # log of the largest term, roughly
    if dps is None:
        dps = 40 + int(peak / 2.3)
    if terms is None:
        terms = int(3.0 * peak / alpha) + 200
    with mp.workdps(dps):
        a = mp.mpf(alpha)
        b = mp.mpf(beta)
        z = mp.mpmathify(z)
        return complex(mp.fsum(z**k * mp.rgamma(a * k + b) for k in range(terms)))


def talbot(hhat, t, dps=80, degree=600):
    """Bromwich inversion on Talbot's contour (mpmath), in extended precision.

    The degree must be large enough for the contour to pass left of weakly
    damped poles at the requested time; 600 covers |Im p| ~ 2 up to t = 100.
    """
    with mp.workdps(dps):
        return float(mp.invertlaplace(hhat, t, method="talbot", degree=degree))


def single_term_transform(alpha, b, big_lambda, kind):
    """mpmath closure for the transform of a one-term model with lambda = 1."""
    a = mp.mpf(alpha)
    bb = mp.mpf(b)
    L = mp.mpf(big_lambda)

    def f(s):
        om = s**2 + bb * s**a + L
        if kind == "u0":
            return (s + bb * s ** (a - 1)) / om
        return 1 / om

    return f


def best_rational(x, tol, q_max=64):
    """Smallest-denominator p/q within tol of x, by exhaustive search."""
    for q in range(1, q_max + 1):
        p = round(x * q)
        if abs(p / q - x) <= tol:
            return Fraction(p, q)
    return None


def multi_indices(orders, m_max):
    """All multi-indices with 1 <= |i| <= m_max and sum p_j i_j < 1, by brute force."""
    n = len(orders)
    out = []
    for idx in itertools.product(range(m_max + 1), repeat=n):
        if 1 <= sum(idx) <= m_max and sum(p * k for p, k in zip(orders, idx)) < 1.0 - 1e-9:
            out.append(idx)
    return sorted(out, key=lambda i: (sum(i), [-k for k in i]))


def fd_jacobian(fun, x, h=1e-6):
    """Central finite differences, relative step per coordinate."""
    x = np.asarray(x, dtype=float)
    f0 = np.asarray(fun(x))
    J = np.empty((f0.size, x.size))
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = h * max(1.0, abs(x[k]))
        J[:, k] = (np.asarray(fun(x + e)) - np.asarray(fun(x - e))) / (2 * e[k])
    return J


def contour_residue(f, center, radius=0.01, nodes=256):
    """(1/2 pi i) of the integral of f around a circle, trapezoid rule."""
    theta = 2 * np.pi * np.arange(nodes) / nodes
    z = center + radius * np.exp(1j * theta)
    # dz / (2 pi i) = radius e^(i theta) dtheta / (2 pi)
    return complex(np.sum(f(z) * radius * np.exp(1j * theta)) / nodes)


def damped_oscillator(t, c, big_lambda):
    """u'' + c u' + Lambda u = 0, u(0) = 0, u'(0) = 1 (underdamped)."""
    wd = np.sqrt(big_lambda - c * c / 4)
    return np.exp(-c * t / 2) * np.sin(wd * t) / wd
