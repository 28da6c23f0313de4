"""Numerical Laplace transforms of traces, and poles/residues of the symbol."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import GridTooCoarse, NewtonDiverged, PoleHit, RightHalfPlanePole, ZeroDerivative
from .forward import TimeTrace
from .model import DampingModel, Excitation, numerator, omega, omega_prime, validate_model

POLE_RESIDUAL_TOL = 1e-12


@dataclass
class LaplaceSamples:
    abscissae: np.ndarray
    values: np.ndarray
    truncation_horizon: float = np.inf

    def __post_init__(self):
        self.abscissae = np.asarray(self.abscissae, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.abscissae.shape != self.values.shape:
            raise ValueError("abscissae and values must have equal length")
        if np.any(self.abscissae <= 0):
            raise ValueError("Laplace abscissae must be positive")
        if np.any(np.diff(self.abscissae) <= 0):
            raise ValueError("Laplace abscissae must be strictly increasing")

    def __len__(self):
        return len(self.abscissae)


@dataclass(frozen=True)
class PoleData:
    pole: complex
    residue: complex
    omega_residual: float


_TAYLOR_TERMS = 18


def _phi(x):
    """Weights int_0^1 e^{-x u} (1-u) du and int_0^1 e^{-x u} u du."""
    x = np.asarray(x, dtype=complex)
    small = np.abs(x) < 0.5
    xs = np.where(small, 1.0, x)
    em = np.exp(-xs)
    p1 = (1.0 - em * (1.0 + xs)) / xs**2
    p0 = (xs - 1.0 + em) / xs**2
    # the closed forms cancel for small x; sum (-x)^k/(k+2)! and (k+1)(-x)^k/(k+2)! instead
    p0s = np.zeros_like(x)
    p1s = np.zeros_like(x)
    for k in range(_TAYLOR_TERMS - 1, -1, -1):
        c = 1.0 / math.factorial(k + 2)
        p0s = p0s * -x + c
        p1s = p1s * -x + (k + 1) * c
    return np.where(small, p0s, p0), np.where(small, p1s, p1)


def _pl_laplace(t, v, s):
    """int_{t0}^{tn} e^{-s t} p(t) dt for the piecewise-linear interpolant p."""
    t = np.asarray(t, dtype=float)
    v = np.asarray(v, dtype=float)
    s = np.asarray(s, dtype=complex)
    dt = np.diff(t)
    out = np.zeros(s.shape, dtype=complex)
    for idx in np.ndindex(s.shape):
        sv = s[idx]
        p0, p1 = _phi(sv * dt)
        out[idx] = np.sum(np.exp(-sv * t[:-1]) * dt * (v[:-1] * p0 + v[1:] * p1))
    return out


_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(6)


def _spline_laplace(t, v, s):
    """int e^{-s t} q(t) dt for the not-a-knot cubic spline q through (t, v).

    Six-point Gauss-Legendre per interval is exact up to the e^{-st} factor,
    whose variation across one interval is small for the intended s*dt.
    """
    q = CubicSpline(t, v)
    a = t[:-1, None]
    dt = np.diff(t)[:, None]
    nodes = (a + 0.5 * dt * (_GAUSS_NODES[None, :] + 1.0)).ravel()
    w = (0.5 * dt * _GAUSS_WEIGHTS[None, :]).ravel()
    return np.exp(-np.outer(s, nodes)) @ (w * q(nodes))


def laplace_numeric(trace: TimeTrace, s, big_lambda_hint: Optional[float] = None, scheme: str = "linear"):
    """Truncated transform int_0^T e^{-st} h(t) dt of an interpolant of the trace.

    ``scheme`` is "linear" (exact transform of the piecewise-linear
    interpolant) or "cubic" (cubic spline, much smaller interpolation error on
    smooth traces).  No tail beyond the last sample is added.
    """
    t, h = trace.times, trace.values
    if len(t) < 4:
        raise GridTooCoarse("need at least 4 samples")
    if big_lambda_hint is not None:
        period = 2.0 * np.pi / np.sqrt(big_lambda_hint)
        if np.max(np.diff(t)) > period / 4.0:
            raise GridTooCoarse(
                f"sampling step {np.max(np.diff(t)):.3g} exceeds a quarter period {period / 4:.3g}"
            )
    if t[0] > 0:
        raise GridTooCoarse("trace must start at t = 0")
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr <= 0):
        raise ValueError("s must be positive")
    if scheme == "linear":
        val = _pl_laplace(t, h, s_arr).real
    elif scheme == "cubic":
        val = _spline_laplace(t, h, np.atleast_1d(s_arr)).reshape(s_arr.shape)
    else:
        raise ValueError(f"unknown quadrature scheme {scheme!r}")
    return float(val) if val.ndim == 0 else val


def transform_trace(trace: TimeTrace, s_grid, big_lambda_hint=None, scheme: str = "linear") -> LaplaceSamples:
    s_grid = np.asarray(s_grid, dtype=float)
    vals = laplace_numeric(trace, s_grid, big_lambda_hint, scheme)
    return LaplaceSamples(s_grid, np.atleast_1d(vals), float(trace.times[-1]))


def _residual_scale(model, s):
    return abs(s) ** 2 + model.big_lambda


def find_poles(model: DampingModel, max_iter: int = 100) -> tuple[PoleData, PoleData]:
    """Conjugate pole pair of the transfer function, by damped Newton on omega.

    Residues are reported for unit excitation of the displacement-free (u1)
    resolvent, i.e. 1/omega'(p).
    """
    validate_model(model)
    s = 1j * np.sqrt(model.big_lambda)
    w = complex(omega(model, s))
    for it in range(max_iter):
        if abs(w) < POLE_RESIDUAL_TOL * 1e-2 * _residual_scale(model, s):
            break
        dw = complex(omega_prime(model, s))
        if dw == 0:
            raise NewtonDiverged("omega' vanished during the pole search", s)
        step = w / dw
        for _ in range(30):
            cand = s - step
            if cand.imag == 0 and cand.real < 0:
                cand += 1e-12j
            wc = complex(omega(model, cand))
            if abs(wc) < abs(w):
                break
            step *= 0.5
        if abs(cand - s) < 1e-16 * abs(s):
            s, w = cand, wc
            break
        s, w = cand, wc
    resid = abs(w)
    if resid >= POLE_RESIDUAL_TOL * _residual_scale(model, s):
        raise NewtonDiverged(f"pole search did not converge, last iterate {s}, |omega|={resid:.3g}", s)
    if s.real > 1e-12 * abs(s):
        raise RightHalfPlanePole(f"pole {s} lies in the right half plane; parameters are not dissipative")
    if s.imag < 0:
        s = s.conjugate()
    res = 1.0 / complex(omega_prime(model, s))
    upper = PoleData(s, res, resid)
    lower = PoleData(s.conjugate(), res.conjugate(), resid)
    return upper, lower


def residue_at(model: DampingModel, exc: Excitation, pole: complex) -> complex:
    """Residue of the observed transform at a simple pole of omega."""
    pole = complex(pole)
    if abs(complex(omega(model, pole))) >= 1e-10 * _residual_scale(model, pole):
        raise PoleHit(f"{pole} is not a root of omega")
    dw = complex(omega_prime(model, pole))
    if abs(dw) < 1e-14:
        raise ZeroDerivative("omega'(p) vanishes: multiple pole")
    return exc.weight * complex(numerator(model, exc, pole)) / dw
