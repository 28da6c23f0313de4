"""Single-mode damping model, excitations and their Laplace-domain symbols.

The scalar resolvent equation for one eigenmode reads

    w'' + Lam*w + sum_j d_j D^{2+gamma_j} w + sum_k b_k lam^beta_k D^alpha_k w = sigma

with ``Lam = c^2 * lam``.  Its Laplace symbol is

    omega(s) = s^2 + Lam + sum_j d_j s^{gamma_j+2} + sum_k b_k lam^beta_k s^alpha_k .
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    BranchCut,
    DuplicateOrder,
    ExcitationError,
    MissingEigenvalue,
    NegativeCoefficient,
    NonMonotoneOrders,
    NonPositiveLambda,
    PoleHit,
    StabilityViolation,
)

POLE_TOL = 1e-12


@dataclass(frozen=True)
class DampingTerm:
    alpha: float
    b: float
    beta: float = 1.0


@dataclass(frozen=True)
class HigherTerm:
    gamma: float
    d: float


@dataclass(frozen=True)
class DampingModel:
    """Scalar-mode model.  ``big_lambda`` is the composite c^2*lambda.

    ``eigenvalue`` is only needed when some beta_k differs from one; when it is
    absent the damping coefficients enter as ``b_k`` directly (lambda = 1).
    """

    big_lambda: float
    damping_terms: tuple[DampingTerm, ...] = ()
    higher_terms: tuple[HigherTerm, ...] = ()
    eigenvalue: Optional[float] = None

    @classmethod
    def from_arrays(cls, big_lambda, alphas=(), bs=(), betas=None, gammas=(), ds=(), eigenvalue=None):
        alphas = list(alphas)
        bs = list(bs)
        if len(alphas) != len(bs):
            raise ValueError("alphas and bs must have equal length")
        betas = [1.0] * len(alphas) if betas is None else list(betas)
        if len(betas) != len(alphas):
            raise ValueError("betas and alphas must have equal length")
        if len(list(gammas)) != len(list(ds)):
            raise ValueError("gammas and ds must have equal length")
        terms = tuple(DampingTerm(float(a), float(b), float(be)) for a, b, be in zip(alphas, bs, betas))
        higher = tuple(HigherTerm(float(g), float(d)) for g, d in zip(gammas, ds))
        return cls(float(big_lambda), terms, higher, None if eigenvalue is None else float(eigenvalue))

    @property
    def alphas(self) -> np.ndarray:
        return np.array([t.alpha for t in self.damping_terms], dtype=float)

    @property
    def bs(self) -> np.ndarray:
        return np.array([t.b for t in self.damping_terms], dtype=float)

    @property
    def betas(self) -> np.ndarray:
        return np.array([t.beta for t in self.damping_terms], dtype=float)

    @property
    def gammas(self) -> np.ndarray:
        return np.array([t.gamma for t in self.higher_terms], dtype=float)

    @property
    def ds(self) -> np.ndarray:
        return np.array([t.d for t in self.higher_terms], dtype=float)

    @property
    def lam(self) -> float:
        return 1.0 if self.eigenvalue is None else self.eigenvalue

    @property
    def wave_speed_sq(self) -> float:
        return self.big_lambda / self.lam

    @property
    def effective_damping(self) -> np.ndarray:
        """The products b_k * lambda^beta_k multiplying s^alpha_k."""
        return self.bs * self.lam ** self.betas

    @property
    def is_fractional(self) -> bool:
        orders = list(self.alphas) + list(self.gammas)
        return any(not float(o).is_integer() for o in orders)

    def with_damping(self, alphas, bs, big_lambda=None) -> "DampingModel":
        """Copy with replaced (alpha, b) pairs; betas are reset to one."""
        return DampingModel.from_arrays(
            self.big_lambda if big_lambda is None else big_lambda,
            alphas,
            bs,
            gammas=self.gammas,
            ds=self.ds,
            eigenvalue=self.eigenvalue,
        )

    def to_dict(self) -> dict:
        out = {
            "big_lambda": self.big_lambda,
            "alphas": self.alphas.tolist(),
            "bs": self.bs.tolist(),
            "betas": self.betas.tolist(),
        }
        if self.higher_terms:
            out["gammas"] = self.gammas.tolist()
            out["ds"] = self.ds.tolist()
        if self.eigenvalue is not None:
            out["eigenvalue"] = self.eigenvalue
        return out


def _check_orders(orders: np.ndarray, name: str) -> None:
    for i in range(len(orders) - 1):
        if orders[i + 1] == orders[i]:
            raise DuplicateOrder(f"{name} orders must be distinct, got {orders[i]} twice")
        if orders[i + 1] < orders[i]:
            raise NonMonotoneOrders(f"{name} orders must be strictly increasing: {orders.tolist()}")


def validate_model(model: DampingModel) -> DampingModel:
    if not model.big_lambda > 0:
        raise NonPositiveLambda(f"big_lambda must be positive, got {model.big_lambda}")
    alphas, gammas = model.alphas, model.gammas
    _check_orders(alphas, "alpha")
    _check_orders(gammas, "gamma")
    for t in model.damping_terms:
        if not 0.0 < t.alpha <= 1.0:
            raise NonMonotoneOrders(f"alpha must lie in (0, 1], got {t.alpha}")
        if not 0.5 < t.beta <= 1.0:
            raise ValueError(f"beta must lie in (1/2, 1], got {t.beta}")
        if t.b < 0:
            raise NegativeCoefficient(f"damping coefficient b must be >= 0, got {t.b}")
        if t.beta != 1.0 and model.eigenvalue is None:
            raise MissingEigenvalue("beta != 1 requires the eigenvalue lambda")
    for h in model.higher_terms:
        if not 0.0 < h.gamma <= 1.0:
            raise NonMonotoneOrders(f"gamma must lie in (0, 1], got {h.gamma}")
        if h.d < 0:
            raise NegativeCoefficient(f"higher-order coefficient d must be >= 0, got {h.d}")
    if len(gammas):
        amax = alphas.max() if len(alphas) else 0.0
        if gammas.max() > amax:
            raise StabilityViolation(
                f"largest gamma ({gammas.max()}) exceeds largest alpha ({amax})"
            )
    if model.eigenvalue is not None and not model.eigenvalue > 0:
        raise NonPositiveLambda("eigenvalue must be positive")
    return model


class ExcitationKind(str, enum.Enum):
    U0 = "u0"
    U1 = "u1"
    U2 = "u2"
    SOURCE = "source"


@dataclass(frozen=True)
class SampledProfile:
    """Temporal source profile given as a table, interpolated piecewise linearly
    and held constant after the last node."""

    times: tuple
    values: tuple

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if len(t) < 2 or len(t) != len(self.values):
            raise ExcitationError("sampled sigma needs >= 2 nodes and matching values")
        if t[0] != 0.0 or np.any(np.diff(t) <= 0):
            raise ExcitationError("sampled sigma nodes must start at 0 and increase strictly")

    def __call__(self, t):
        return np.interp(t, self.times, self.values)

    def laplace(self, s):
        """Exact transform of the piecewise-linear profile (constant tail)."""
        from .laplace import _pl_laplace

        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        s = np.asarray(s, dtype=complex)
        return _pl_laplace(t, v, s) + v[-1] * np.exp(-s * t[-1]) / s


@dataclass(frozen=True)
class Excitation:
    kind: ExcitationKind
    mode_coefficient: float = 1.0
    observation_weight: float = 1.0
    sigma: object = None  # None, "constant" or SampledProfile

    def __post_init__(self):
        object.__setattr__(self, "kind", ExcitationKind(self.kind))
        if self.kind is ExcitationKind.SOURCE and self.sigma is None:
            object.__setattr__(self, "sigma", "constant")

    @property
    def weight(self) -> float:
        return self.mode_coefficient * self.observation_weight

    def sigma_hat(self, s):
        if self.sigma == "constant":
            return 1.0 / np.asarray(s, dtype=complex)
        return self.sigma.laplace(s)


def validate_excitation(exc: Excitation, model: DampingModel | None = None) -> Excitation:
    if exc.mode_coefficient == 0 or exc.observation_weight == 0:
        raise ExcitationError("mode coefficient and observation weight must be nonzero")
    if exc.kind is ExcitationKind.U2 and (model is None or not model.higher_terms):
        raise ExcitationError("initial acceleration needs higher-order terms (gamma_J > 0)")
    if exc.kind is ExcitationKind.SOURCE:
        if not (exc.sigma == "constant" or isinstance(exc.sigma, SampledProfile)):
            raise ExcitationError(f"unsupported sigma profile {exc.sigma!r}")
    elif exc.sigma not in (None, "none"):
        raise ExcitationError("sigma is only used with a source excitation")
    return exc


def _powers(s, orders):
    """s**orders for every order, shape (len(orders),) + s.shape."""
    s = np.asarray(s, dtype=complex)
    orders = np.asarray(orders, dtype=float)
    return np.power(s[None, ...], orders.reshape((-1,) + (1,) * s.ndim))


def _check_branch(model: DampingModel, s) -> None:
    if not model.is_fractional:
        return
    s = np.asarray(s, dtype=complex)
    bad = (s.imag == 0) & (s.real < 0)
    if np.any(bad):
        raise BranchCut("s lies on the negative real axis; offset by +-i*eps")


def omega(model: DampingModel, s):
    """The characteristic symbol omega(s), principal branch for s^alpha."""
    _check_branch(model, s)
    s_arr = np.asarray(s, dtype=complex)
    val = s_arr**2 + model.big_lambda
    if model.damping_terms:
        val = val + np.tensordot(model.effective_damping, _powers(s_arr, model.alphas), axes=1)
    if model.higher_terms:
        val = val + np.tensordot(model.ds, _powers(s_arr, model.gammas + 2.0), axes=1)
    return val[()] if val.ndim == 0 else val


def omega_prime(model: DampingModel, s):
    """Derivative d omega / ds, term by term."""
    _check_branch(model, s)
    s_arr = np.asarray(s, dtype=complex)
    val = 2.0 * s_arr
    if model.damping_terms:
        coef = model.effective_damping * model.alphas
        val = val + np.tensordot(coef, _powers(s_arr, model.alphas - 1.0), axes=1)
    if model.higher_terms:
        coef = model.ds * (model.gammas + 2.0)
        val = val + np.tensordot(coef, _powers(s_arr, model.gammas + 1.0), axes=1)
    return val[()] if val.ndim == 0 else val


def numerator(model: DampingModel, exc: Excitation, s):
    """Unweighted resolvent numerator for the excitation kind."""
    s_arr = np.asarray(s, dtype=complex)
    kind = exc.kind
    if kind is ExcitationKind.U0:
        val = s_arr.copy()
        if model.damping_terms:
            val = val + np.tensordot(model.effective_damping, _powers(s_arr, model.alphas - 1.0), axes=1)
        if model.higher_terms:
            val = val + np.tensordot(model.ds, _powers(s_arr, model.gammas + 1.0), axes=1)
    elif kind is ExcitationKind.U1:
        val = np.ones_like(s_arr)
        if model.higher_terms:
            val = val + np.tensordot(model.ds, _powers(s_arr, model.gammas), axes=1)
    elif kind is ExcitationKind.U2:
        val = np.tensordot(model.ds, _powers(s_arr, model.gammas - 1.0), axes=1)
    else:
        val = np.asarray(exc.sigma_hat(s_arr), dtype=complex)
    return val[()] if np.ndim(val) == 0 else val


def hhat_analytic(model: DampingModel, exc: Excitation, s):
    """Laplace transform of the observed trace, weight * numerator / omega."""
    w = omega(model, s)
    s_arr = np.asarray(s, dtype=complex)
    scale = np.abs(s_arr) ** 2 + model.big_lambda
    if np.any(np.abs(w) < POLE_TOL * scale):
        raise PoleHit("s is (numerically) a root of omega")
    return exc.weight * numerator(model, exc, s) / w
