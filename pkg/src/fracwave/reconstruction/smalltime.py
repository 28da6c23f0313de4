"""Reconstruction of two damping terms from small-time samples of a u1 trace.

For the velocity excitation h(0) = 0 and h'(0) = W, so the transform of
g = -Lambda h - h'' is W F(s) / omega(s).  Expanding in 1/s,

    W F/omega = W (F/s^2) (1 - (Lambda + F)/s^2 + ...),

and mapping s^(a-k) to t^(k-1-a)/Gamma(k-a) gives, with E_i = b_i lam^beta_i,

    g(t) ~ c_1 t^(1-a_1) + c_2 t^(1-a_2)
           - W Lambda E_i t^(3-a_i)/Gamma(4-a_i)                   (i = 1, 2)
           - W E_1^2 t^(3-2a_1)/Gamma(4-2a_1) - 2 W E_1 E_2 t^(3-a_1-a_2)/Gamma(4-a_1-a_2)
           - W E_2^2 t^(3-2a_2)/Gamma(4-2a_2)

where c_i = W E_i / Gamma(2 - a_i).  The "flipped" variant reverses the sign of
the second-order terms and drops the factor 2 on the cross term.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import digamma

from .. import special
from ..errors import Diverged, NonUniformGrid
from ..forward import TimeTrace
from ..model import DampingModel, Excitation, ExcitationKind
from .report import IterationRecord, ReconstructionReport, Status, damped_step

MIN_SAMPLES = 64

# multiplicities of (E_1, E_2) in the second-order terms; the first two carry Lambda
_SECOND_ORDER = ((1, 0), (0, 1), (2, 0), (1, 1), (0, 2))


def second_derivative(values, dt: float) -> np.ndarray:
    """Second-order central differences, one-sided fourth-order at both ends."""
    h = np.asarray(values, dtype=float)
    out = np.empty_like(h)
    out[1:-1] = (h[2:] - 2.0 * h[1:-1] + h[:-2]) / dt**2
    w = np.array([45.0, -154.0, 214.0, -156.0, 61.0, -10.0]) / 12.0
    out[0] = w @ h[:6] / dt**2
    out[-1] = w @ h[-1:-7:-1] / dt**2
    return out


def smalltime_preprocess(trace: TimeTrace, big_lambda: float) -> TimeTrace:
    """g(t) = -Lambda h(t) - h''(t) on the interior of a uniform grid.

    The first and last two samples are dropped.
    """
    t, h = trace.times, trace.values
    if len(t) < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {len(t)}")
    dt = np.diff(t)
    if np.max(np.abs(dt - dt.mean())) > 1e-9 * dt.mean():
        raise NonUniformGrid("small-time preprocessing needs a uniform time grid")
    g = -big_lambda * h - second_derivative(h, float(dt.mean()))
    meta = dict(trace.meta, derived="g = -Lambda h - h''", big_lambda=float(big_lambda))
    return TimeTrace(t[2:-2], g[2:-2], meta)


def smalltime_model(x, t, big_lambda: float, weight: float = 1.0, variant: str = "exact"):
    """Value and Jacobian of the seven-term expansion.

    ``x`` is (alpha_1, alpha_2, c_1, c_2); the Jacobian columns follow that order.
    """
    if variant not in ("exact", "flipped"):
        raise ValueError(f"variant must be 'exact' or 'flipped', got {variant!r}")
    a = np.asarray(x[:2], dtype=float)
    c = np.asarray(x[2:], dtype=float)
    t = np.asarray(t, dtype=float)
    lt = np.log(t)
    g2 = np.array([special.gamma(2.0 - ai) for ai in a])
    eff = c * g2 / weight  # E_i
    psi2 = digamma(2.0 - a)
    sign = -1.0 if variant == "exact" else 1.0
    cross = 2.0 if variant == "exact" else 1.0

    lead = t[:, None] ** (1.0 - a[None, :])
    value = lead @ c
    J = np.zeros((len(t), 4))
    J[:, :2] = -lead * c[None, :] * lt[:, None]
    J[:, 2:] = lead
    for k, mult in enumerate(_SECOND_ORDER):
        m = np.array(mult, dtype=float)
        kappa = sign * weight * (big_lambda if k < 2 else 1.0) * (cross if mult == (1, 1) else 1.0)
        q = 4.0 - m @ a
        basis = t ** (q - 1.0) / special.gamma(q)
        prod = np.prod(eff**m)
        v = kappa * prod * basis
        value = value + v
        for j in range(2):
            if m[j] == 0:
                continue
            J[:, j] += v * m[j] * (digamma(q) - psi2[j] - lt)
            # d/dE_j of E^m times dE_j/dc_j = Gamma(2 - a_j)/W
            dprod = m[j] * eff[j] ** (m[j] - 1.0) * np.prod(np.delete(eff**m, j))
            J[:, 2 + j] += kappa * dprod * basis * g2[j] / weight
    return value, J


@dataclass(frozen=True)
class SmallTimeOptions:
    tol: float = 1e-8
    step_tol: float = 1e-10
    max_iter: int = 8
    max_halvings: int = 20
    # singular values below rcond * sigma_max are dropped from each step
    rcond: float = 1e-4
    variant: str = "exact"

    def __post_init__(self):
        if self.variant not in ("exact", "flipped"):
            raise ValueError(f"variant must be 'exact' or 'flipped', got {self.variant!r}")


def coefficients_from_bs(alphas, bs, weight=1.0, eigenvalue=1.0) -> np.ndarray:
    return np.array([weight * b * eigenvalue / special.gamma(2.0 - a) for a, b in zip(alphas, bs)])


def bs_from_coefficients(alphas, coeffs, weight=1.0, eigenvalue=1.0) -> np.ndarray:
    return np.array([c * special.gamma(2.0 - a) / (weight * eigenvalue) for a, c in zip(alphas, coeffs)])


def smalltime_newton(
    initial: DampingModel,
    g_trace: TimeTrace,
    big_lambda: float | None = None,
    opts: SmallTimeOptions = SmallTimeOptions(),
    exc: Excitation = Excitation(ExcitationKind.U1),
) -> ReconstructionReport:
    """Gauss-Newton over (alpha_1, alpha_2, c_1, c_2) against preprocessed g samples.

    Each step is a truncated-SVD least-squares step followed by halving.  The
    history keeps the term order of ``initial``; the recovered model is
    sorted by order.  The recorded residual is the 2-norm of model - g.
    """
    if exc.kind is not ExcitationKind.U1:
        raise ValueError("small-time reconstruction expects a velocity (u1) trace")
    if len(initial.damping_terms) != 2:
        raise ValueError("small-time reconstruction is implemented for two damping terms")
    big_lambda = initial.big_lambda if big_lambda is None else float(big_lambda)
    lam = initial.lam
    W = exc.weight
    t, g = g_trace.times, g_trace.values
    if np.any(t <= 0):
        raise ValueError("g samples must lie at positive times")
    if len(t) < 4:
        raise ValueError("need at least 4 samples of g")

    def resid(x):
        v, J = smalltime_model(x, t, big_lambda, W, opts.variant)
        return v - g, J

    def merit(x):
        with np.errstate(over="ignore", invalid="ignore"):
            val = float(np.linalg.norm(smalltime_model(x, t, big_lambda, W, opts.variant)[0] - g))
        return val if np.isfinite(val) else np.inf

    def feasible(x):
        return bool(np.all(x[:2] > 0) and np.all(x[:2] < 1) and np.all(x[2:] >= 0))

    def record(it, x, res):
        return IterationRecord(it, x[:2].copy(), bs_from_coefficients(x[:2], x[2:], W, lam), big_lambda, res, x.copy())

    x = np.concatenate([initial.alphas, coefficients_from_bs(initial.alphas, initial.bs, W, lam)])
    history = [record(0, x, None)]
    status = Status.RESIDUAL_SATURATED
    prev = merit(x)
    growth = 0
    for it in range(1, opts.max_iter + 1):
        if prev < opts.tol:
            history.append(record(it, x, prev))
            status = Status.CONVERGED
            break
        r, J = resid(x)
        x_new, step, res, accepted = damped_step(x, r, J, merit, feasible, opts.max_halvings, rcond=opts.rcond)
        if not accepted:
            break
        x = x_new
        history.append(record(it, x, res))
        growth = growth + 1 if res > prev else 0
        prev = res
        if growth >= 3:
            raise Diverged("small-time Newton residual grew for 3 consecutive steps", _report(x, W, lam, big_lambda, initial, history, Status.DIVERGED))
        if res < opts.tol:
            status = Status.CONVERGED
            break
        if np.linalg.norm(step) < opts.step_tol:
            break
    return _report(x, W, lam, big_lambda, initial, history, status)


def _report(x, weight, lam, big_lambda, initial, history, status):
    alphas = x[:2]
    bs = bs_from_coefficients(alphas, x[2:], weight, lam)
    order = np.argsort(alphas, kind="stable")
    recovered = DampingModel.from_arrays(big_lambda, alphas[order], np.maximum(bs[order], 0.0), eigenvalue=initial.eigenvalue)
    notes = []
    if status is Status.RESIDUAL_SATURATED:
        notes.append("residual plateaued above tolerance (expansion truncation and differencing error)")
    extras = {"coefficients": x[2:].tolist()}
    return ReconstructionReport("smalltime", recovered, history, status, notes=notes, extras=extras)
