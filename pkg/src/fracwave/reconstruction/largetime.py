"""Reconstruction from large-time samples of a displacement (u0) trace.

For small s the transform has the singular expansion

    hhat(s) ~ (W/s) * sum_{m>=1} -(-F(s)/Lambda)^m,   F(s) = sum_j b_j lam^beta_j s^p_j,

and by the Tauberian correspondence s^(sigma-1) <-> t^-sigma / Gamma(1-sigma)

    h(t) ~ sum_{i in I} c_i t^-sigma(i) / Gamma(1 - sigma(i)),   sigma(i) = sum_j p_j i_j,

over multi-indices i with |i| <= floor(1/p_1) and sigma(i) < 1.

By default only the orders and the leading coefficients c_{1,j} are unknown;
the higher composite coefficients follow from them through the expansion
above.  Fitting every c_i independently is available but the resulting system
is numerically rank deficient on the usual windows.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import digamma

from .. import special
from ..errors import Diverged, WindowTooNarrow
from ..forward import TimeTrace
from ..model import DampingModel, Excitation, ExcitationKind
from .report import IterationRecord, ReconstructionReport, Status, levenberg_step

SIGMA_MARGIN = 1e-9
MASK_RATIO = 1e-3


def _multinomial(idx) -> float:
    out = math.factorial(sum(idx))
    for k in idx:
        out //= math.factorial(k)
    return float(out)


@dataclass(frozen=True)
class AsymptoticTermSet:
    """Multi-indices kept in the large-time expansion for the orders ``p``."""

    orders: tuple[float, ...]
    m_max: int
    indices: tuple[tuple[int, ...], ...]

    @classmethod
    def build(cls, orders) -> "AsymptoticTermSet":
        p = tuple(float(x) for x in orders)
        if not p or not all(0.0 < x < 1.0 for x in p):
            raise ValueError(f"orders must lie in (0, 1), got {p}")
        m_max = int(math.floor(1.0 / min(p)))
        keep = []
        for m in range(1, m_max + 1):
            for idx in _compositions(m, len(p)):
                if sum(pi * k for pi, k in zip(p, idx)) < 1.0 - SIGMA_MARGIN:
                    keep.append(idx)
        return cls(p, m_max, tuple(keep))

    def sigma(self, idx) -> float:
        return float(sum(pi * k for pi, k in zip(self.orders, idx)))

    def sigmas(self) -> np.ndarray:
        return np.array([self.sigma(i) for i in self.indices])

    def by_degree(self, m: int) -> list[tuple[int, ...]]:
        return [i for i in self.indices if sum(i) == m]

    def __len__(self):
        return len(self.indices)


def _compositions(m: int, n: int):
    """All nonnegative integer n-tuples summing to m, in lexicographic order."""
    for cut in itertools.combinations(range(m + n - 1), n - 1):
        prev = -1
        parts = []
        for c in cut + (m + n - 1,):
            parts.append(c - prev - 1)
            prev = c
        yield tuple(parts)


def composite_coefficient(idx, bs, big_lambda, weight=1.0, eigenvalue=1.0, betas=None) -> float:
    """Coefficient of t^-sigma/Gamma(1-sigma) implied by (b, Lambda) for a u0 trace."""
    betas = np.ones(len(bs)) if betas is None else np.asarray(betas, float)
    eff = np.asarray(bs, float) * eigenvalue**betas
    m = sum(idx)
    prod = 1.0
    for e, k in zip(eff, idx):
        prod *= e**k
    return -weight * (-1.0 / big_lambda) ** m * _multinomial(idx) * prod


def coefficient_gradient(idx, bs, big_lambda, weight=1.0, eigenvalue=1.0) -> np.ndarray:
    """Derivative of ``composite_coefficient`` with respect to each b_j (beta = 1)."""
    eff = np.asarray(bs, float) * eigenvalue
    out = np.zeros(len(eff))
    base = -weight * (-1.0 / big_lambda) ** sum(idx) * _multinomial(idx)
    for j, k in enumerate(idx):
        if k == 0:
            continue
        prod = k * eigenvalue * eff[j] ** (k - 1)
        for q, kq in enumerate(idx):
            if q != j:
                prod *= eff[q] ** kq
        out[j] = base * prod
    return out


def largetime_model(p, coeffs, t, terms: AsymptoticTermSet):
    """Value and gradient of the truncated expansion at times ``t``.

    ``coeffs`` is aligned with ``terms.indices``.  The gradient has columns
    (d/dp_1 .. d/dp_N, d/dc_1 .. d/dc_K).
    """
    p = np.asarray(p, dtype=float)
    coeffs = np.asarray(coeffs, dtype=float)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    idx = np.array(terms.indices, dtype=float).reshape(len(terms), len(p))
    sig = idx @ p
    if np.any(1.0 - sig <= SIGMA_MARGIN):
        raise ValueError("term set is stale for these orders; rebuild it")
    rg = np.array([1.0 / special.gamma(1.0 - s) for s in sig])
    basis = np.power(t[:, None], -sig[None, :]) * rg[None, :]
    value = basis @ coeffs
    # d/dsigma [t^-s / Gamma(1-s)] = t^-s/Gamma(1-s) * (psi(1-s) - ln t)
    dsig = basis * (digamma(1.0 - sig)[None, :] - np.log(t)[:, None]) * coeffs[None, :]
    grad = np.concatenate([dsig @ idx, basis], axis=1)
    return value, grad


@dataclass(frozen=True)
class LargeTimeOptions:
    tol: float = 1e-10
    step_tol: float = 1e-12
    max_iter: int = 10
    max_halvings: int = 20
    mask_ratio: float = MASK_RATIO
    coefficients: str = "tied"  # or "free"
    residual: str = "log"  # or "relative"

    def __post_init__(self):
        if self.coefficients not in ("tied", "free"):
            raise ValueError(f"coefficients must be 'tied' or 'free', got {self.coefficients!r}")
        if self.residual not in ("log", "relative"):
            raise ValueError(f"residual must be 'log' or 'relative', got {self.residual!r}")


def _unit(j: int, n: int) -> tuple[int, ...]:
    return tuple(int(k == j) for k in range(n))


class _Fit:
    """Residual and Jacobian of the large-time fit for one parametrization."""

    def __init__(self, t, h, n, big_lambda, weight, eigenvalue, opts: LargeTimeOptions):
        self.t = t
        self.h = h
        self.n = n
        self.big_lambda = big_lambda
        self.weight = weight
        self.eigenvalue = eigenvalue
        self.tied = opts.coefficients == "tied"
        self.log = opts.residual == "log" and bool(np.all(h > 0))
        self.b_per_c = big_lambda / (weight * eigenvalue)

    def bs(self, lead):
        return np.asarray(lead, float) * self.b_per_c

    def coefficients(self, x, terms: AsymptoticTermSet):
        n = self.n
        if not self.tied:
            return np.asarray(x[n:], float), None
        bs = self.bs(x[n:])
        c = np.array([composite_coefficient(i, bs, self.big_lambda, self.weight, self.eigenvalue) for i in terms.indices])
        dc = np.array([coefficient_gradient(i, bs, self.big_lambda, self.weight, self.eigenvalue) for i in terms.indices])
        return c, dc * self.b_per_c

    def evaluate(self, x, terms: AsymptoticTermSet):
        n = self.n
        c, dc = self.coefficients(x, terms)
        v, g = largetime_model(x[:n], c, self.t, terms)
        if dc is not None:
            g = np.concatenate([g[:, :n], g[:, n:] @ dc], axis=1)
        return v, g

    def residual(self, x, terms):
        v, g = self.evaluate(x, terms)
        if self.log:
            if np.any(v <= 0):
                return None, None
            return np.log(v / self.h), g / v[:, None]
        scale = 1.0 / np.abs(self.h)
        return (v - self.h) * scale, g * scale[:, None]

    def relative_misfit(self, x, terms) -> float:
        v, _ = self.evaluate(x, terms)
        return float(np.linalg.norm((v - self.h) / self.h))


def largetime_newton(
    initial: DampingModel,
    trace: TimeTrace,
    exc: Excitation = Excitation(ExcitationKind.U0),
    opts: LargeTimeOptions = LargeTimeOptions(),
) -> ReconstructionReport:
    """Fit orders and composite coefficients to a large-time u0 trace.

    Lambda (``initial.big_lambda``) and the weight are treated as known.  The
    recovered b_i follow from the leading coefficients, c_{1,i} = W b_i lam / Lambda.
    The recorded residual is the 2-norm of the relative misfit (model - h)/h.
    """
    if exc.kind is not ExcitationKind.U0:
        raise ValueError("large-time reconstruction expects a displacement (u0) trace")
    t = trace.times
    h = trace.values
    if len(t) < 2 or t[0] <= 0 or t[-1] / t[0] < 2.0:
        raise WindowTooNarrow("need t_max / t_min >= 2 on a positive window")
    if np.any(h == 0):
        raise ValueError("trace vanishes inside the window")
    lam = initial.lam
    big_lambda = initial.big_lambda
    W = exc.weight
    n = len(initial.damping_terms)
    fit = _Fit(t, h, n, big_lambda, W, lam, opts)
    p = np.array(initial.alphas, dtype=float)
    terms = AsymptoticTermSet.build(p)
    coeffs = {i: composite_coefficient(i, initial.bs, big_lambda, W, lam) for i in terms.indices}
    pruning: list[tuple] = []

    def pack(p, coeffs, terms):
        if fit.tied:
            return np.concatenate([p, [coeffs[_unit(j, n)] for j in range(n)]])
        return np.concatenate([p, [coeffs[i] for i in terms.indices]])

    def lead_bs(coeffs):
        return fit.bs([coeffs[_unit(j, n)] for j in range(n)])

    x = pack(p, coeffs, terms)
    history = [IterationRecord(0, p.copy(), lead_bs(coeffs), None, None, x.copy())]
    status = Status.RESIDUAL_SATURATED
    growth = 0
    prev = fit.relative_misfit(x, terms)
    for it in range(1, opts.max_iter + 1):
        r, J = fit.residual(x, terms)
        if r is None:
            # model not positive: fall back to the relative residual this step
            scale = 1.0 / np.abs(h)
            v, g = fit.evaluate(x, terms)
            r, J = (v - h) * scale, g * scale[:, None]

        def merit(v, terms=terms):
            pv = v[:n]
            if not (np.all(pv > 0) and np.all(pv < 1)):
                return np.inf
            # the retained set follows the candidate orders
            cand_terms = AsymptoticTermSet.build(pv)
            if not fit.tied:
                cand = _coefficient_dict(fit, v, terms)
                bs = fit.bs([cand[_unit(j, n)] for j in range(n)])
                v = np.concatenate([pv, [cand.get(i, composite_coefficient(i, bs, big_lambda, W, lam)) for i in cand_terms.indices]])
            rv, _ = fit.residual(v, cand_terms)
            return np.inf if rv is None else float(np.linalg.norm(rv))

        x_new, step, _, accepted = levenberg_step(x, r, J, merit, max_tries=opts.max_halvings)
        coeffs = _coefficient_dict(fit, x_new, terms)
        p, coeffs = _sorted(x_new[:n], coeffs)
        new_terms = AsymptoticTermSet.build(p)
        _log_changes(terms, new_terms, it, pruning)
        terms = new_terms
        if not fit.tied:
            bs = lead_bs(coeffs)
            for i in terms.indices:
                coeffs.setdefault(i, composite_coefficient(i, bs, big_lambda, W, lam))
        x = pack(p, coeffs, terms)
        res = fit.relative_misfit(x, terms)
        history.append(IterationRecord(it, p.copy(), lead_bs(coeffs), None, res, x.copy()))
        growth = growth + 1 if res > prev else 0
        prev = res
        if growth >= 3:
            report = _report(p, coeffs, fit, history, Status.DIVERGED, pruning, initial, [])
            raise Diverged("large-time Newton residual grew for 3 consecutive steps", report)
        if res < opts.tol:
            status = Status.CONVERGED
            break
        if not accepted or np.linalg.norm(step) < opts.step_tol:
            break
    masked = masked_terms(p, coeffs, t[-1], opts.mask_ratio)
    if masked:
        status = Status.TERM_MASKED
    return _report(p, coeffs, fit, history, status, pruning, initial, masked)


def _coefficient_dict(fit: _Fit, x, terms) -> dict:
    c, _ = fit.coefficients(x, terms)
    return dict(zip(terms.indices, c))


def _sorted(p, coeffs):
    """Sort the orders, carrying every multi-index along with its order."""
    order = np.argsort(p, kind="stable")
    if np.all(order == np.arange(len(p))):
        return np.array(p, dtype=float), coeffs
    return np.asarray(p)[order], {tuple(idx[k] for k in order): c for idx, c in coeffs.items()}


def _log_changes(old: AsymptoticTermSet, new: AsymptoticTermSet, it: int, pruning: list) -> None:
    before, after = set(old.indices), set(new.indices)
    for idx in old.indices:
        if idx not in after:
            pruning.append((it, idx, "dropped: sigma >= 1"))
    for idx in new.indices:
        if idx not in before:
            pruning.append((it, idx, "added: sigma < 1"))


def masked_terms(p, coeffs: dict, t_max: float, ratio: float = MASK_RATIO) -> list[int]:
    """Indices (0-based) of terms whose tail hides inside the O(t^-2p_1) remainder.

    A term i >= 1 is masked when p_i > 2 p_1 and its leading contribution at
    t_max is below ``ratio`` times that of the first term.
    """
    n = len(p)

    def contribution(j):
        return abs(coeffs[_unit(j, n)]) * t_max ** (-p[j]) / special.gamma(1.0 - p[j])

    lead = contribution(0)
    return [j for j in range(1, n) if p[j] > 2.0 * p[0] and contribution(j) < ratio * lead]


def _report(p, coeffs, fit: _Fit, history, status, pruning, initial, masked):
    n = len(p)
    bs = fit.bs([coeffs[_unit(j, n)] for j in range(n)])
    recovered = DampingModel.from_arrays(fit.big_lambda, p, np.maximum(bs, 0.0), eigenvalue=initial.eigenvalue)
    notes = [f"term {j + 1} masked by the O(t^-2p_1) remainder" for j in masked]
    extras = {
        "coefficients": {",".join(map(str, k)): float(v) for k, v in coeffs.items()},
        "masked_terms": [j + 1 for j in masked],
        "raw_bs": bs.tolist(),
    }
    return ReconstructionReport("largetime", recovered, history, status, pruning_log=pruning, notes=notes, extras=extras)
