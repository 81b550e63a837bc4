"""
Complex log-gamma by upward recursion and the Stirling series
"""
import logging
from functools import lru_cache

import numpy as np
from scipy.special import bernoulli

from app.core.config import settings
from app.core.exceptions import NonFiniteValueError

logger = logging.getLogger(__name__)

STIRLING_TERMS = 10
HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)


class GammaPoleError(ValueError):
    """log-gamma requested at a non-positive integer"""


@lru_cache(maxsize=None)
def _stirling_coefficients(terms: int) -> np.ndarray:
    # B_{2k} / (2k (2k-1)) for k = 1..terms
    b = bernoulli(2 * terms)
    return np.array([b[2 * k] / (2 * k * (2 * k - 1)) for k in range(1, terms + 1)])


def _as_complex(z) -> np.ndarray:
    return np.asarray(z, dtype=np.complex128)


def check_finite(value, name: str):
    if not np.all(np.isfinite(value)):
        raise NonFiniteValueError(f"{name} produced a non-finite value")
    return value


def lngamma(z, shift: float = None):
    """Principal branch of log Gamma(z), vectorised over z.

    Recurses upward until Re z >= shift and applies a 10-term Stirling series.
    Returns a Python complex for scalar input.
    """
    shift = settings.STIRLING_SHIFT if shift is None else shift
    zz = _as_complex(z)
    scalar = zz.ndim == 0
    zz = np.atleast_1d(zz).copy()

    poles = (zz.imag == 0) & (zz.real <= 0) & (zz.real == np.round(zz.real))
    if np.any(poles):
        raise GammaPoleError(f"Gamma has a pole at z = {zz[poles][0].real:g}")

    correction = np.zeros_like(zz)
    w = zz.copy()
    # log Gamma(z) = log Gamma(z + m) - sum_k log(z + k)
    active = w.real < shift
    while np.any(active):
        correction[active] += np.log(w[active])
        w[active] += 1.0
        active = w.real < shift

    coef = _stirling_coefficients(STIRLING_TERMS)
    inv = 1.0 / w
    inv2 = inv * inv
    series = np.zeros_like(w)
    for c in coef[::-1]:
        series = series * inv2 + c
    series *= inv

    result = (w - 0.5) * np.log(w) - w + HALF_LOG_2PI + series - correction
    check_finite(result, "lngamma")
    return complex(result[0]) if scalar else result


def gamma(z):
    return np.exp(lngamma(z))
