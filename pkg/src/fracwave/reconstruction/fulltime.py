"""Laplace-domain reconstruction from full-time observations.

The transfer function is rearranged as

    F(s) = sum_k b_k lam^beta_k s^alpha_k = G(s)

where G only involves the data hhat(s), the known weight and Lambda.  The
parameters (b, alpha, Lambda) are fitted over a set of positive abscissae.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..errors import DataZero, DenominatorZero, Diverged
from ..laplace import LaplaceSamples
from ..model import DampingModel, Excitation, ExcitationKind, hhat_analytic
from .report import IterationRecord, ReconstructionReport, Status, damped_step

DEFAULT_S_GRID = np.geomspace(0.5, 16.0, 24)
COLLISION = 1e-4


@dataclass(frozen=True)
class FullTimeOptions:
    tol: float = 1e-8
    step_tol: float = 1e-10
    max_iter: int = 30
    log_iterations: int = 2
    fix_lambda: bool = False
    max_halvings: int = 20


def pack(alphas, bs, big_lambda) -> np.ndarray:
    return np.concatenate([np.asarray(bs, float), np.asarray(alphas, float), [float(big_lambda)]])


def unpack(params, n: int):
    params = np.asarray(params, dtype=float)
    return params[n : 2 * n], params[:n], float(params[2 * n])


def _G(samples: LaplaceSamples, exc: Excitation, big_lambda: float):
    """Data side G(s) and its derivative with respect to Lambda."""
    s = samples.abscissae
    hh = samples.values
    if np.any(hh == 0):
        raise DataZero("Laplace data vanish at some abscissa")
    W = exc.weight
    kind = exc.kind
    if kind is ExcitationKind.U1:
        return W / hh - s**2 - big_lambda, -np.ones_like(s)
    if kind is ExcitationKind.SOURCE:
        sig = np.asarray(exc.sigma_hat(s)).real
        return W * sig / hh - s**2 - big_lambda, -np.ones_like(s)
    if kind is ExcitationKind.U0:
        X = s * hh / W
        den = 1.0 - X
        if np.any(den == 0):
            raise DenominatorZero("s*hhat(s) equals the weight at some abscissa")
        return big_lambda / den - s**2 - big_lambda, X / den
    raise ValueError(f"full-time reconstruction does not support {kind.value} data")


def fulltime_system(params, samples: LaplaceSamples, exc: Excitation, eigenvalue: float = 1.0, with_beta: bool = False, betas=None):
    """Residual F - G and its Jacobian with columns (b_1..b_N, alpha_1..alpha_N, Lambda).

    With ``with_beta`` the d/dbeta columns are appended after Lambda.
    """
    params = np.asarray(params, dtype=float)
    n = (len(params) - 1) // 2
    alphas, bs, big_lambda = unpack(params, n)
    betas = np.ones(n) if betas is None else np.asarray(betas, float)
    s = samples.abscissae
    lam_b = eigenvalue**betas
    pw = s[:, None] ** alphas[None, :]
    F = pw @ (bs * lam_b)
    G, dG = _G(samples, exc, big_lambda)
    r = F - G
    J = np.empty((len(s), 2 * n + 1 + (n if with_beta else 0)))
    J[:, :n] = pw * lam_b[None, :]
    J[:, n : 2 * n] = pw * (bs * lam_b)[None, :] * np.log(s)[:, None]
    J[:, 2 * n] = -dG
    if with_beta:
        J[:, 2 * n + 1 :] = pw * (bs * lam_b * np.log(eigenvalue))[None, :]
    return r, J


def _log_system(params, samples, exc, eigenvalue):
    """Residual log hhat_model - log hhat_data and its Jacobian.

    Returns None when a logarithm is undefined (nonpositive transform).
    """
    params = np.asarray(params, dtype=float)
    n = (len(params) - 1) // 2
    alphas, bs, big_lambda = unpack(params, n)
    s = samples.abscissae
    pw = s[:, None] ** alphas[None, :]
    dF = np.concatenate([pw * eigenvalue, pw * (bs * eigenvalue)[None, :] * np.log(s)[:, None]], axis=1)
    F = pw @ (bs * eigenvalue)
    om = s**2 + big_lambda + F
    kind = exc.kind
    if kind is ExcitationKind.U0:
        num = s + F / s
    elif kind is ExcitationKind.U1:
        num = np.ones_like(s)
    elif kind is ExcitationKind.SOURCE:
        num = np.asarray(exc.sigma_hat(s)).real
    else:
        raise ValueError(f"full-time reconstruction does not support {kind.value} data")
    model = exc.weight * num / om
    data = samples.values
    if np.any(model <= 0) or np.any(data <= 0) or np.any(om <= 0):
        return None
    r = np.log(model) - np.log(data)
    J = np.empty((len(s), 2 * n + 1))
    scale = -1.0 / om
    if kind is ExcitationKind.U0:
        scale = scale + 1.0 / (s * num)
    J[:, : 2 * n] = dF * scale[:, None]
    J[:, 2 * n] = -1.0 / om
    return r, J


def _sort_pairs(params, n):
    alphas, bs, lam = unpack(params, n)
    order = np.argsort(alphas, kind="stable")
    return pack(alphas[order], bs[order], lam)


def fulltime_newton(
    initial: DampingModel,
    samples: LaplaceSamples,
    exc: Excitation,
    opts: FullTimeOptions = FullTimeOptions(),
) -> ReconstructionReport:
    """Recover (alpha, b, Lambda) from Laplace samples, starting from ``initial``.

    The first ``opts.log_iterations`` steps work on log F = log G, which is
    much less nonlinear in the orders; the remaining ones on F = G directly.
    """
    n = len(initial.damping_terms)
    if n < 1:
        raise ValueError("need at least one damping term")
    n_unknown = 2 * n + (0 if opts.fix_lambda else 1)
    if len(samples) < n_unknown:
        raise ValueError(f"need at least {n_unknown} Laplace samples, got {len(samples)}")
    lam = initial.lam
    x = pack(initial.alphas, initial.bs, initial.big_lambda)
    active = np.ones(len(x), dtype=bool)
    if opts.fix_lambda:
        active[-1] = False

    def direct(p):
        return fulltime_system(p, samples, exc, lam)

    def merit_direct(p):
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                val = float(np.linalg.norm(direct(p)[0]))
            return val if np.isfinite(val) else np.inf
        except (DataZero, DenominatorZero, FloatingPointError):
            return np.inf

    def feasible(p):
        a, b, L = unpack(p, n)
        return bool(np.all(a > 0) and np.all(b >= 0) and L > 0 and np.all(np.isfinite(p)))

    history = [IterationRecord(0, *unpack(x, n), None, x.copy())]
    notes: list[str] = []
    status = Status.RESIDUAL_SATURATED
    growth = 0
    prev_res = merit_direct(x)

    def lift(v):
        full = x.copy()
        full[active] = v
        return full

    def step(system, merit):
        r, J = system
        return damped_step(
            x[active],
            r,
            J[:, active],
            lambda v: merit(lift(v)),
            lambda v: feasible(lift(v)),
            opts.max_halvings,
        )

    def merit_log(p):
        out = _log_system(p, samples, exc, lam)
        return np.inf if out is None else float(np.linalg.norm(out[0]))

    for it in range(1, opts.max_iter + 1):
        if prev_res < opts.tol:
            # already at a solution: a step would only chase roundoff
            new_a, step_a, accepted = x[active], np.zeros(int(active.sum())), True
        else:
            new_a, step_a, _, accepted = step(direct(x), merit_direct)
        if it <= opts.log_iterations and prev_res >= opts.tol:
            # the log-linearized step is kept only when it does better on
            # the direct residual than the plain step
            system = _log_system(x, samples, exc, lam)
            if system is not None:
                cand = step(system, merit_log)
                if cand[3] and merit_direct(lift(cand[0])) < merit_direct(lift(new_a)):
                    new_a, step_a, _, accepted = cand
        x = _sort_pairs(lift(new_a), n)
        res = merit_direct(x)
        history.append(IterationRecord(it, *unpack(x, n), res, x.copy()))
        alphas = unpack(x, n)[0]
        if n > 1 and np.min(np.diff(alphas)) < COLLISION:
            notes.append(f"iteration {it}: OrderCollision, two orders within {COLLISION:g}")
        growth = growth + 1 if res > prev_res else 0
        prev_res = res
        if growth >= 3:
            report = _report(x, n, initial, history, Status.DIVERGED, notes)
            raise Diverged("full-time Newton residual grew for 3 consecutive steps", report)
        if res < opts.tol:
            status = Status.CONVERGED
            break
        if np.linalg.norm(step_a) < opts.step_tol or not accepted:
            break
    return _report(x, n, initial, history, status, notes)


def _report(x, n, initial, history, status, notes):
    alphas, bs, big_lambda = unpack(x, n)
    recovered = DampingModel.from_arrays(big_lambda, alphas, bs, eigenvalue=initial.eigenvalue)
    return ReconstructionReport("fulltime", recovered, history, status, notes=notes)


def analytic_samples(model: DampingModel, exc: Excitation, s_grid: Optional[Sequence[float]] = None) -> LaplaceSamples:
    s = DEFAULT_S_GRID if s_grid is None else np.asarray(s_grid, dtype=float)
    vals = np.asarray(hhat_analytic(model, exc, s)).real
    return LaplaceSamples(s, vals)
