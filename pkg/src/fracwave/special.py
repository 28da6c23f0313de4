"""Real-argument Gamma helpers.

All Gamma evaluations in the reconstruction formulas go through :func:`gamma`
so tests can instrument the call and check which arguments are requested.
"""
import math

import numpy as np


def gamma(x):
    """Gamma function for a real argument (reflection handled by libm)."""
    return math.gamma(x)


def rgamma(x):
    """Reciprocal Gamma, returning 0 at the poles 0, -1, -2, ..."""
    if x <= 0 and float(x).is_integer():
        return 0.0
    if x > 171.0:
        return math.exp(-math.lgamma(x))
    return 1.0 / math.gamma(x)


def rgamma_array(x):
    x = np.asarray(x, dtype=float)
    return np.vectorize(rgamma, otypes=[float])(x)


def lgamma_array(x):
    x = np.asarray(x, dtype=float)
    return np.vectorize(math.lgamma, otypes=[float])(x)
