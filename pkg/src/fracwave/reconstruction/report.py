"""Reconstruction reports and the shared damped Gauss-Newton step."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..model import DampingModel


class Status(str, enum.Enum):
    CONVERGED = "Converged"
    RESIDUAL_SATURATED = "ResidualSaturated"
    DIVERGED = "Diverged"
    TERM_MASKED = "TermMasked"


@dataclass
class IterationRecord:
    iteration: int
    alphas: np.ndarray
    bs: np.ndarray
    big_lambda: Optional[float]
    residual: Optional[float]
    params: Optional[np.ndarray] = None

    def as_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "alphas": [float(a) for a in self.alphas],
            "bs": [float(b) for b in self.bs],
            "big_lambda": None if self.big_lambda is None else float(self.big_lambda),
            "residual": None if self.residual is None else float(self.residual),
        }


@dataclass
class ReconstructionReport:
    method: str
    recovered: DampingModel
    history: list[IterationRecord]
    status: Status
    pruning_log: list[tuple] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    config_digest: Optional[str] = None
    extras: dict = field(default_factory=dict)

    @property
    def iterations(self) -> int:
        return self.history[-1].iteration

    @property
    def final_residual(self) -> Optional[float]:
        return self.history[-1].residual

    def as_dict(self) -> dict:
        return {
            "method": self.method,
            "status": self.status.value,
            "recovered": self.recovered.to_dict(),
            "history": [r.as_dict() for r in self.history],
            "pruning_log": [list(map(_plain, p)) for p in self.pruning_log],
            "notes": list(self.notes),
            "config_digest": self.config_digest,
            "extras": {k: _plain(v) for k, v in self.extras.items()},
        }

    def table(self) -> str:
        """Iteration table laid out as iter | alphas | bs | Lambda | residual."""
        n = max(len(r.alphas) for r in self.history)
        show_lam = any(r.big_lambda is not None for r in self.history) and self.method == "fulltime"
        head = ["iter"] + [f"alpha_{i + 1}" for i in range(n)] + [f"b_{i + 1}" for i in range(n)]
        if show_lam:
            head.append("Lambda")
        head.append("residual")
        rows = [head]
        for r in self.history:
            row = [str(r.iteration)]
            pad = [""] * (n - len(r.alphas))
            row += [f"{a:.4f}" for a in r.alphas] + pad
            row += [f"{b:.4f}" for b in r.bs] + pad
            if show_lam:
                row.append(f"{r.big_lambda:.3f}")
            row.append("" if r.residual is None else f"{r.residual:.3e}")
            rows.append(row)
        widths = [max(len(row[i]) for row in rows) for i in range(len(head))]
        lines = [" | ".join(c.rjust(w) for c, w in zip(row, widths)) for row in rows]
        lines.insert(1, "-+-".join("-" * w for w in widths))
        return "\n".join(lines)


def _plain(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v


def damped_step(
    x: np.ndarray,
    r: np.ndarray,
    J: np.ndarray,
    merit: Callable[[np.ndarray], float],
    feasible: Callable[[np.ndarray], bool] = lambda x: True,
    max_halvings: int = 20,
    rcond: Optional[float] = None,
):
    """Gauss-Newton step with simple halving.

    Returns (new_x, step, merit_value, accepted) where ``accepted`` is False
    when no halving lowered the merit function.
    """
    step = np.linalg.lstsq(J, -r, rcond=rcond)[0]
    base = merit(x)
    lam = 1.0
    for _ in range(max_halvings + 1):
        cand = x + lam * step
        if feasible(cand):
            val = merit(cand)
            if np.isfinite(val) and val < base:
                return cand, lam * step, val, True
        lam *= 0.5
    return x, np.zeros_like(step), base, False


def levenberg_step(
    x: np.ndarray,
    r: np.ndarray,
    J: np.ndarray,
    merit: Callable[[np.ndarray], float],
    feasible: Callable[[np.ndarray], bool] = lambda x: True,
    max_tries: int = 20,
):
    """Gauss-Newton step, falling back to increasingly damped (Levenberg) steps.

    The plain step is tried first; when it is infeasible or does not lower
    the merit function the damping mu runs up from 1e-8 * sigma_max by
    factors of ten.  Returns the same tuple as :func:`damped_step`.
    """
    U, S, Vt = np.linalg.svd(J, full_matrices=False)
    rot = U.T @ r
    base = merit(x)
    keep = S > S[0] * np.finfo(float).eps * max(J.shape)
    mus = [0.0] + [S[0] * 10.0 ** k for k in range(-8, -8 + max_tries)]
    for mu in mus:
        filt = np.where(keep, S / (S**2 + mu**2), 0.0)
        step = -Vt.T @ (filt * rot)
        cand = x + step
        if feasible(cand):
            val = merit(cand)
            if np.isfinite(val) and val < base:
                return cand, step, val, True
    return x, np.zeros_like(x), base, False
