"""Multi-term fractionally damped wave equations: single-mode simulation and
recovery of the damping terms from time traces."""
from .forward import TimeTrace, solve_trace
from .laplace import LaplaceSamples, find_poles, laplace_numeric, residue_at, transform_trace
from .mittag_leffler import MlAccuracy, ml
from .model import DampingModel, DampingTerm, Excitation, ExcitationKind, HigherTerm, hhat_analytic, omega

__version__ = "0.1.0"

__all__ = [
    "DampingModel",
    "DampingTerm",
    "Excitation",
    "ExcitationKind",
    "HigherTerm",
    "LaplaceSamples",
    "MlAccuracy",
    "TimeTrace",
    "find_poles",
    "hhat_analytic",
    "laplace_numeric",
    "ml",
    "omega",
    "residue_at",
    "solve_trace",
    "transform_trace",
]
