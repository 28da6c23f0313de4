"""Sequential peel-off of power-law terms from a large-time u0 trace.

The leading order is read off the log-log slope, its coefficient from
h(t) t^alpha at the largest times.  The fitted term is subtracted and the
procedure repeats on the remainder over the later part [delta*T, T] of the
window.
"""
from __future__ import annotations

from typing import Optional

import numpy as np

from .. import special
from ..errors import SignLoss, WindowTooNarrow
from ..forward import TimeTrace
from ..model import DampingModel, Excitation, ExcitationKind
from .report import IterationRecord, ReconstructionReport, Status

TAIL_POINTS = 5


def loglog_slope(t, h) -> float:
    """Least-squares slope of log|h| against log t."""
    A = np.stack([np.log(t), np.ones(len(t))], axis=1)
    return float(np.linalg.lstsq(A, np.log(np.abs(h)), rcond=None)[0][0])


def lhospital_order(trace: TimeTrace) -> np.ndarray:
    """Pointwise order estimate -t h'(t)/h(t) = -d log h / d log t.

    A diagnostic only: it tends to alpha_1 for large t but differentiates
    the data, so it is noisier than the fitted slope.
    """
    t, h = trace.times, trace.values
    return -np.gradient(np.log(np.abs(h)), np.log(t))


def _top_decade(t: np.ndarray) -> np.ndarray:
    return t >= t[-1] / 10.0


def sequential_peel(
    trace: TimeTrace,
    max_terms: int = 3,
    delta: float = 0.25,
    big_lambda: float = 1.0,
    exc: Excitation = Excitation(ExcitationKind.U0),
    eigenvalue: float = 1.0,
    floor: Optional[float] = None,
) -> ReconstructionReport:
    """Peel up to ``max_terms`` power laws off a positive large-time trace.

    ``floor`` defaults to ten times the noise estimated from the trace's
    recorded relative noise level (or machine precision for clean data).
    Raises SignLoss when the remainder changes sign on the refit window
    before the floor is reached.
    """
    if max_terms < 1:
        raise ValueError("max_terms must be at least 1")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    t, h = trace.times, trace.values
    if len(t) < TAIL_POINTS + 2 or t[0] <= 0:
        raise WindowTooNarrow("need a positive window with enough samples")
    if np.any(h <= 0):
        raise ValueError("trace must be strictly positive on the window")
    W = exc.weight
    scale = float(np.max(np.abs(h)))
    if floor is None:
        level = float(trace.meta.get("noise_level", 0.0))
        floor = 10.0 * max(level, np.finfo(float).eps) * scale

    alphas: list[float] = []
    coeffs: list[float] = []
    bs: list[float] = []
    history = [IterationRecord(0, np.array([]), np.array([]), big_lambda, 1.0)]
    rem = h.copy()
    sel = _top_decade(t)
    status = Status.RESIDUAL_SATURATED
    notes: list[str] = []
    for k in range(1, max_terms + 1):
        tw, rw = t[sel], rem[sel]
        if np.any(np.sign(rw) != np.sign(rw[-1])):
            report = _report(alphas, bs, coeffs, history, Status.DIVERGED, big_lambda, eigenvalue)
            raise SignLoss(f"remainder changes sign after {k - 1} term(s)", report)
        a = -loglog_slope(tw, rw)
        # h ~ c t^-a at the largest times; c carries the sign of the remainder
        c = float(np.mean(rem[-TAIL_POINTS:] * t[-TAIL_POINTS:] ** a))
        if not 0.0 < a < 1.0:
            notes.append(f"term {k}: fitted order {a:.4g} outside (0, 1), stopped")
            status = Status.DIVERGED
            break
        alphas.append(a)
        coeffs.append(c)
        bs.append(c * big_lambda * special.gamma(1.0 - a) / (W * eigenvalue))
        rem = rem - c * t ** (-a)
        size = float(np.max(np.abs(rem[t >= delta * t[-1]])))
        history.append(IterationRecord(k, np.array(alphas), np.array(bs), big_lambda, size / scale))
        if size < floor:
            status = Status.CONVERGED
            break
        sel = t >= delta * t[-1]
    return _report(alphas, bs, coeffs, history, status, big_lambda, eigenvalue, notes)


def _report(alphas, bs, coeffs, history, status, big_lambda, eigenvalue, notes=()):
    order = np.argsort(alphas, kind="stable")
    a = np.asarray(alphas, float)[order]
    b = np.asarray(bs, float)[order]
    recovered = DampingModel.from_arrays(big_lambda, a, np.maximum(b, 0.0), eigenvalue=eigenvalue)
    extras = {"coefficients": list(map(float, coeffs)), "raw_bs": list(map(float, bs))}
    return ReconstructionReport("peel", recovered, history, status, notes=list(notes), extras=extras)
