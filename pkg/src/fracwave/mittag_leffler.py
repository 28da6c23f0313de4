"""Two-parameter Mittag-Leffler function E_{a,b}(z) = sum_k z^k / Gamma(a k + b).

Three evaluation regimes are used for ``0 < alpha <= 2``:

* ``|z| <= series_radius``: Horner evaluation of the truncated Taylor series;
* ``|z| >= asymptotic_radius``: exponential residues plus the algebraic
  expansion ``-sum_k z^-k / Gamma(b - a k)``;
* in between: the Laplace representation

      E_{a,b}(z) = 1/(2 pi i) int_C e^s s^(a-b) / (s^a - z) ds

  evaluated by the trapezoid rule on a parabola ``s = mu (1 + iu)^2``, with
  the residues of the poles ``s^a = z`` lying right of the parabola added
  explicitly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidAlpha, NearDefective, NoConvergence

_MU_CANDIDATES = tuple(2.0 ** (k / 2.0) for k in range(-4, 9))
_TAIL_DECAY = 40.0  # |e^s| at the truncated ends of the parabola is e^-40


@dataclass(frozen=True)
class MlAccuracy:
    target_rel_err: float = 1e-12
    series_radius: float = 1.0
    asymptotic_radius: float = 50.0
    min_nodes: int = 64
    max_nodes: int = 512

    def __post_init__(self):
        if not 0 < self.series_radius < self.asymptotic_radius:
            raise ValueError("need 0 < series_radius < asymptotic_radius")
        if not 0 < self.target_rel_err <= 1e-6:
            raise ValueError("target_rel_err must lie in (0, 1e-6]")


DEFAULT_ACCURACY = MlAccuracy()


def _check_alpha(alpha: float, beta: float) -> None:
    if not (0.0 < alpha <= 2.0):
        raise InvalidAlpha(f"alpha must lie in (0, 2], got {alpha}")
    if not beta > 0:
        raise InvalidAlpha(f"beta must be positive, got {beta}")


def _series(alpha, beta, z, tol):
    z = np.asarray(z, dtype=complex)
    if z.size == 0:
        return z.copy()
    rmax = float(np.max(np.abs(z)))
    # number of terms until |z|^k / Gamma(alpha k + beta) < tol * 1e-3
    k = 0
    log_r = math.log(rmax) if rmax > 0 else -np.inf
    target = math.log(tol) - 7.0
    while True:
        k += 1
        lt = k * log_r - math.lgamma(alpha * k + beta)
        if k > 8 and lt < target:
            break
        if k > 20000:
            raise NoConvergence("Taylor series did not converge")
    coef = np.exp(-np.array([math.lgamma(alpha * j + beta) for j in range(k + 1)]))
    acc = np.full(z.shape, coef[-1], dtype=complex)
    for c in coef[-2::-1]:
        acc = acc * z + c
    return acc


def _pole_set(alpha, z):
    """Poles of s^(alpha-beta)/(s^alpha - z) on the principal sheet.

    Returns an array of shape (3,) + z.shape with NaN where no pole exists.
    """
    r = np.abs(z) ** (1.0 / alpha)
    theta = np.angle(z)
    out = np.full((3,) + z.shape, np.nan + 0j)
    for idx, j in enumerate((-1, 0, 1)):
        ang = theta + 2.0 * math.pi * j
        valid = (np.abs(ang) < alpha * math.pi) & (np.abs(z) > 0)
        out[idx] = np.where(valid, r * np.exp(1j * ang / alpha), np.nan)
    return out


def _residues(alpha, beta, poles):
    with np.errstate(over="ignore", invalid="ignore"):
        res = np.where(np.isnan(poles), 0.0, np.power(poles, 1.0 - beta) * np.exp(poles) / alpha)
    return np.sum(res, axis=0)


def _asymptotic(alpha, beta, z, tol):
    z = np.asarray(z, dtype=complex)
    poles = _pole_set(alpha, z)
    expo = _residues(alpha, beta, poles)
    alg = np.zeros(z.shape, dtype=complex)
    inv = 1.0 / z
    term_pow = np.ones(z.shape, dtype=complex)
    prev = np.inf
    for k in range(1, 200):
        term_pow = term_pow * inv
        g = beta - alpha * k
        if g <= 0 and float(g).is_integer():
            continue
        coef = 1.0 / math.gamma(g) if g < 171 else 0.0
        term = term_pow * coef
        alg -= term
        mag = float(np.max(np.abs(term)))
        if mag <= tol * 1e-3 * max(float(np.min(np.abs(alg))), 1e-300):
            break
        if mag > prev and k > 10:
            break  # asymptotic series starts to diverge
        prev = mag
    return expo + alg


def _parabola_mu(alpha, z, max_nodes=512):
    """Per-point parabola scale balancing roundoff (~e^mu) against the
    trapezoid error caused by poles close to the contour."""
    poles = _pole_set(alpha, z)
    best_mu = np.full(z.shape, 1.0)
    best_err = np.full(z.shape, np.inf)
    for mu in _MU_CANDIDATES:
        with np.errstate(invalid="ignore"):
            d = np.abs(np.sqrt(poles / mu).real - 1.0)
        d = np.where(np.isnan(d), np.inf, d)
        dmin = np.minimum(np.min(d, axis=0), 1.0)
        h = 8.0 * math.sqrt(1.0 + _TAIL_DECAY / mu) / max_nodes
        est = math.exp(mu) * 1e-16 + np.exp(-2.0 * math.pi * dmin / h)
        better = est < best_err
        best_mu = np.where(better, mu, best_mu)
        best_err = np.where(better, est, best_err)
    return best_mu, poles


def _contour(alpha, beta, z, tol, min_nodes=64, max_nodes=512):
    z = np.asarray(z, dtype=complex)
    if z.size == 0:
        return z.copy()
    flat = z.ravel()
    mu, poles = _parabola_mu(alpha, flat, max_nodes)
    with np.errstate(invalid="ignore"):
        inside = np.where(np.isnan(poles), False, np.sqrt(poles / mu).real > 1.0)
    res = _residues(alpha, beta, np.where(inside, poles, np.nan))

    def integral(n):
        out = np.empty(flat.shape, dtype=complex)
        # node data depend on mu only; group the points by their parabola
        for m in np.unique(mu):
            sel = mu == m
            um = math.sqrt(1.0 + _TAIL_DECAY / m)
            u = np.linspace(-um, um, n + 1)
            w = 1.0 + 1j * u
            s = m * w * w
            with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                g = np.exp(s) * np.power(s, alpha - beta) * (m * w / math.pi)
                g[0] *= 0.5
                g[-1] *= 0.5
                sa = np.power(s, alpha)
                f = g[None, :] / (sa[None, :] - flat[sel][:, None])
            out[sel] = (2.0 * um / n) * np.sum(f, axis=1)
        return out

    n = min_nodes
    prev = integral(n) + res
    while True:
        n *= 2
        cur = integral(n) + res
        with np.errstate(invalid="ignore"):
            err = np.abs(cur - prev)
            ok = (err <= tol * np.maximum(np.abs(cur), 1e-300)) | ~np.isfinite(res)
        if ok.all():
            return cur.reshape(z.shape)
        if n >= max_nodes:
            # accept points whose absolute error is tiny compared to the
            # integrand scale (true value near a zero of E)
            scale = np.exp(mu) * (1.0 + np.abs(flat))
            ok |= err <= tol * 1e-3 * scale
            if ok.all():
                return cur.reshape(z.shape)
            bad = flat[~ok][0]
            raise NoConvergence(
                f"contour quadrature for E_{{{alpha},{beta}}}({bad}) did not reach {tol:g}"
            )
        prev = cur


def ml(alpha: float, beta: float, z, acc: MlAccuracy = DEFAULT_ACCURACY):
    """Vectorized Mittag-Leffler function E_{alpha,beta}(z) for complex z."""
    alpha = float(alpha)
    beta = float(beta)
    _check_alpha(alpha, beta)
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    tol = acc.target_rel_err
    if alpha == 1.0 and beta == 1.0:
        out = np.exp(z)
    elif alpha == 2.0 and beta == 1.0:
        out = np.cosh(np.sqrt(z))
    elif alpha == 2.0 and beta == 2.0:
        r = np.sqrt(z)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.where(np.abs(r) < 1e-8, 1.0 + z / 6.0, np.sinh(r) / np.where(r == 0, 1, r))
    else:
        out = np.empty(z.shape, dtype=complex)
        mag = np.abs(z)
        small = mag <= acc.series_radius
        large = mag >= acc.asymptotic_radius
        mid = ~(small | large)
        if small.any():
            out[small] = _series(alpha, beta, z[small], tol)
        if large.any():
            out[large] = _asymptotic(alpha, beta, z[large], tol)
        if mid.any():
            out[mid] = _contour(alpha, beta, z[mid], tol, acc.min_nodes, acc.max_nodes)
    return out[0] if scalar else out


def ml_scalar(alpha: float, beta: float, z: complex, acc: MlAccuracy = DEFAULT_ACCURACY) -> complex:
    return complex(ml(alpha, beta, complex(z), acc))


def ml_matrix(alpha: float, beta: float, A, acc: MlAccuracy = DEFAULT_ACCURACY, cond_max: float = 1e8):
    """E_{alpha,beta}(A) for a diagonalizable real square matrix A.

    Raises NearDefective when the eigenvector matrix is too ill-conditioned
    for the eigendecomposition route.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("A must be a square matrix")
    evals, V = np.linalg.eig(A)
    cond = np.linalg.cond(V)
    if not np.isfinite(cond) or cond > cond_max:
        raise NearDefective(f"eigenvector condition number {cond:.3g} exceeds {cond_max:g}", cond)
    e = ml(alpha, beta, evals, acc)
    out = (V * e[None, :]) @ np.linalg.inv(V)
    norm = np.linalg.norm(out)
    if np.linalg.norm(out.imag) > 1e-9 * max(norm, 1e-300):
        raise NoConvergence("recomposed matrix function has a significant imaginary part")
    return out.real
