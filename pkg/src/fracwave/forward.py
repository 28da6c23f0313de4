"""Forward solver: companion-system reformulation and Mittag-Leffler solution.

With every order rational and ``M`` the least common denominator, the scalar
resolvent equation is equivalent to ``D^g Y = A Y + e_N f / lead`` with
``g = 1/M`` and a companion matrix ``A``.  Its solution is

    Y(t) = E_{g,1}(t^g A) Y0 + int_0^t (t-s)^(g-1) E_{g,g}((t-s)^g A) e_N f(s) ds

which is evaluated through one eigendecomposition of ``A``.
"""
from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import IrrationalOrder, NearDefective, SystemTooLarge
from .mittag_leffler import DEFAULT_ACCURACY, MlAccuracy, ml
from .model import (
    DampingModel,
    Excitation,
    ExcitationKind,
    SampledProfile,
    validate_excitation,
    validate_model,
)

log = logging.getLogger(__name__)

COND_MAX = 1e8
PERTURBATION = 1e-7


@dataclass(frozen=True)
class Rationalization:
    M: int
    N: int
    damping_slots: tuple[int, ...]
    higher_slots: tuple[int, ...]
    fractions: dict


def _rational(x: float, tol: float, q_max: int) -> Fraction:
    frac = Fraction(x).limit_denominator(q_max)
    err = abs(float(frac) - x)
    if err > tol:
        raise IrrationalOrder(
            f"order {x!r} has no rational approximation p/q with q <= {q_max} within {tol:g}"
            f" (best {frac}, error {err:.3g})",
            best_error=err,
        )
    return frac


def rationalize_orders(model: DampingModel, tol: float = 1e-9, q_max: int = 64, n_max: int = 256) -> Rationalization:
    fr_alpha = [_rational(a, tol, q_max) for a in model.alphas]
    fr_high = [_rational(2.0 + g, tol, q_max) for g in model.gammas]
    dens = [f.denominator for f in fr_alpha + fr_high] + [1]
    M = math.lcm(*dens)
    top = fr_high[-1] if fr_high else Fraction(2)
    N = int(top * M)
    if N > n_max:
        raise SystemTooLarge(f"companion system would have size {N} > {n_max}")
    fractions = {f"alpha_{k + 1}": f for k, f in enumerate(fr_alpha)}
    fractions.update({f"gamma_{j + 1}": f - 2 for j, f in enumerate(fr_high)})
    return Rationalization(
        M=M,
        N=N,
        damping_slots=tuple(int(f * M) for f in fr_alpha),
        higher_slots=tuple(int(f * M) for f in fr_high),
        fractions=fractions,
    )


@dataclass
class CompanionSystem:
    gamma: float
    M: int
    N: int
    A: np.ndarray
    Y0: np.ndarray
    forcing_scale: float
    order_map: dict

    @property
    def forcing_row(self) -> int:
        return self.N - 1


def build_companion(model: DampingModel, exc: Excitation, rat: Optional[Rationalization] = None, **rat_kw) -> CompanionSystem:
    rat = rat or rationalize_orders(model, **rat_kw)
    M, N = rat.M, rat.N
    A = np.zeros((N, N))
    A[np.arange(N - 1), np.arange(1, N)] = 1.0
    # coefficients of the ODE, keyed by slot of the corresponding derivative
    coeffs = {0: model.big_lambda}
    for slot, c in zip(rat.damping_slots, model.effective_damping):
        coeffs[slot] = coeffs.get(slot, 0.0) + c
    if model.higher_terms:
        lead = float(model.ds[-1])
        coeffs[2 * M] = coeffs.get(2 * M, 0.0) + 1.0
        for slot, d in zip(rat.higher_slots[:-1], model.ds[:-1]):
            coeffs[slot] = coeffs.get(slot, 0.0) + d
    else:
        lead = 1.0
    for slot, c in coeffs.items():
        A[N - 1, slot] -= c / lead
    Y0 = np.zeros(N)
    kind = exc.kind
    if kind is ExcitationKind.U0:
        Y0[0] = 1.0
    elif kind is ExcitationKind.U1:
        Y0[M] = 1.0
    elif kind is ExcitationKind.U2:
        Y0[2 * M] = 1.0
    order_map = {"u": 0, "u_t": M, "u_tt": 2 * M}
    order_map.update({k: int(f * M) for k, f in rat.fractions.items() if k.startswith("alpha")})
    order_map.update({k: int((f + 2) * M) for k, f in rat.fractions.items() if k.startswith("gamma")})
    return CompanionSystem(1.0 / M, M, N, A, Y0, 1.0 / lead, order_map)


def char_poly_in_z(model: DampingModel, z, M: int):
    """omega re-expressed in z = s^(1/M): every power s^q becomes z^(q M)."""
    z = np.asarray(z, dtype=complex)
    val = z ** (2 * M) + model.big_lambda
    for a, c in zip(model.alphas, model.effective_damping):
        val = val + c * z ** int(round(a * M))
    for g, d in zip(model.gammas, model.ds):
        val = val + d * z ** int(round((2 + g) * M))
    return val


@dataclass
class TimeTrace:
    times: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.shape != self.values.shape or self.times.ndim != 1:
            raise ValueError("times and values must be 1-d arrays of equal length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    def window(self, t_min: float, t_max: float) -> "TimeTrace":
        sel = (self.times >= t_min) & (self.times <= t_max)
        meta = dict(self.meta, window=[t_min, t_max])
        return TimeTrace(self.times[sel], self.values[sel], meta)

    def __len__(self):
        return len(self.times)


def model_digest(model: DampingModel, exc: Excitation) -> str:
    payload = {"model": model.to_dict(), "kind": exc.kind.value, "weight": exc.weight}
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:16]


class _Modal:
    """Eigendecomposition of a companion matrix, factored once per model."""

    def __init__(self, sys: CompanionSystem):
        evals, V = np.linalg.eig(sys.A)
        cond = np.linalg.cond(V)
        if not np.isfinite(cond) or cond > COND_MAX:
            raise NearDefective(
                f"companion matrix is (nearly) defective, eigenvector condition {cond:.3g};"
                f" perturb the damping coefficients by ~{PERTURBATION:g}",
                cond,
            )
        self.evals = evals
        self.cond = cond
        self.row0 = V[0, :]
        Vinv = np.linalg.inv(V)
        self.init_coef = Vinv @ sys.Y0
        self.force_coef = Vinv[:, -1] * sys.forcing_scale
        self.gamma = sys.gamma


def _homogeneous(modal: _Modal, times, acc):
    g = modal.gamma
    tg = np.power(times, g)
    z = tg[:, None] * modal.evals[None, :]
    E = ml(g, 1.0, z.ravel(), acc).reshape(z.shape)
    return (E * (modal.row0 * modal.init_coef)[None, :]).sum(axis=1).real


def _primitive(modal: _Modal, tau, order, acc):
    """Iterated integrals of the kernel tau^(g-1) E_{g,g}(mu tau^g), per eigenvalue:
    K1 = tau^g E_{g,g+1}(mu tau^g), K2 = tau^(g+1) E_{g,g+2}(mu tau^g)."""
    g = modal.gamma
    tau = np.asarray(tau, dtype=float)
    z = np.power(tau, g)[:, None] * modal.evals[None, :]
    E = ml(g, g + order, z.ravel(), acc).reshape(z.shape)
    return np.power(tau, g + order - 1)[:, None] * E


def _source(modal: _Modal, exc: Excitation, times, acc):
    weights = modal.row0 * modal.force_coef
    positive = times > 0
    out = np.zeros(len(times))
    t = times[positive]
    if exc.sigma == "constant":
        K1 = _primitive(modal, t, 1, acc)
        out[positive] = (K1 * weights[None, :]).sum(axis=1).real
        return out
    prof: SampledProfile = exc.sigma
    nodes = np.asarray(prof.times, dtype=float)
    vals = np.asarray(prof.values, dtype=float)
    slopes = np.diff(vals) / np.diff(nodes)
    K1 = _primitive(modal, t, 1, acc)
    total = K1 * vals[0]
    # integration by parts against the piecewise-constant derivative of sigma
    for j, m in enumerate(slopes):
        a, b = nodes[j], nodes[j + 1]
        act = t > a
        if not act.any() or m == 0.0:
            continue
        ta = t[act]
        upper = _primitive(modal, ta - a, 2, acc)
        tb = ta - b
        lower = np.zeros_like(upper)
        inside = tb > 0
        if inside.any():
            lower[inside] = _primitive(modal, tb[inside], 2, acc)
        total[act] += m * (upper - lower)
    out[positive] = (total * weights[None, :]).sum(axis=1).real
    return out


def _perturbed(model: DampingModel, k: int) -> DampingModel:
    scale = 1.0 + k * PERTURBATION
    terms = tuple(replace(t, b=t.b * scale) for t in model.damping_terms)
    return replace(model, damping_terms=terms, big_lambda=model.big_lambda * (1.0 + 0.5 * k * PERTURBATION))


def solve_trace(
    model: DampingModel,
    exc: Excitation,
    times,
    acc: MlAccuracy = DEFAULT_ACCURACY,
    *,
    rat_tol: float = 1e-9,
    q_max: int = 64,
    n_max: int = 256,
) -> TimeTrace:
    """Observed trace h(t) = weight * u(t) on the given grid."""
    validate_model(model)
    validate_excitation(exc, model)
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) == 0:
        raise ValueError("times must be a nonempty 1-d array")
    if times[0] < 0:
        raise ValueError("times must be nonnegative")
    rat = rationalize_orders(model, rat_tol, q_max, n_max)
    meta = {"digest": model_digest(model, exc), "M": rat.M, "N": rat.N}
    used = model
    for attempt in range(4):
        sys = build_companion(used, exc, rat)
        try:
            modal = _Modal(sys)
            break
        except NearDefective:
            if attempt == 3:
                raise
            used = _perturbed(model, attempt + 1)
            log.info("companion matrix nearly defective; perturbing coefficients (attempt %d)", attempt + 1)
    if used is not model:
        meta["perturbation"] = attempt * PERTURBATION
    meta["eig_condition"] = float(modal.cond)
    if exc.kind is ExcitationKind.SOURCE:
        vals = _source(modal, exc, times, acc)
    else:
        vals = _homogeneous(modal, times, acc)
    meta["horizon"] = float(times[-1])
    meta.setdefault("noise_level", 0.0)
    return TimeTrace(times, exc.weight * vals, meta)
