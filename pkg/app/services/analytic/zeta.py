"""
Riemann zeta and L(s, chi_-4) by Euler-Maclaurin summation
"""
import logging
import math
from functools import lru_cache
from typing import Tuple

import numpy as np
from scipy.special import bernoulli, factorial

from app.core.config import settings
from app.services.analytic.gamma import check_finite

logger = logging.getLogger(__name__)

_CHUNK = 256


class ZetaPoleError(ValueError):
    """zeta(s) requested at its pole s = 1"""


@lru_cache(maxsize=None)
def _em_coefficients(terms: int) -> np.ndarray:
    # B_{2k} / (2k)! for k = 1..terms
    b = bernoulli(2 * terms)
    return np.array([b[2 * k] / factorial(2 * k, exact=True) for k in range(1, terms + 1)])


def _prepare(s) -> Tuple[np.ndarray, bool]:
    ss = np.asarray(s, dtype=np.complex128)
    return np.atleast_1d(ss), ss.ndim == 0


def _cutoff(ss: np.ndarray) -> int:
    height = float(np.max(np.abs(ss.imag))) if ss.size else 0.0
    return max(settings.EM_MIN_TERMS, int(math.ceil(height)) + 10)


def _power_sum(ss: np.ndarray, bases: np.ndarray) -> np.ndarray:
    """sum_b b^{-s} for every s, in chunks to bound memory"""
    log_bases = np.log(bases)
    out = np.empty_like(ss)
    for start in range(0, ss.size, _CHUNK):
        block = ss[start:start + _CHUNK]
        out[start:start + _CHUNK] = np.exp(-np.outer(block, log_bases)).sum(axis=1)
    return out


def _em_tail(ss: np.ndarray, x: float, terms: int) -> np.ndarray:
    """Half-endpoint plus Bernoulli corrections of sum_{m >= x} m^{-s}, pole term excluded"""
    log_x = math.log(x)
    x_pow = np.exp(-ss * log_x)
    tail = 0.5 * x_pow
    rising = ss.copy()
    power = x_pow / x
    for k, coef in enumerate(_em_coefficients(terms), start=1):
        tail = tail + coef * rising * power
        rising = rising * (ss + 2 * k - 1) * (ss + 2 * k)
        power = power / (x * x)
    return tail


def _pole_difference(ss: np.ndarray, x: float, y: float) -> np.ndarray:
    """(x^{1-s} - y^{1-s}) / (s - 1), stable through s = 1"""
    u = 1.0 - ss
    z = u * math.log(x / y)
    small = np.abs(z) < 1e-8
    safe = np.where(small, 1.0, z)
    ratio = np.where(small, 1.0 + 0.5 * z, np.expm1(safe) / safe)
    return -np.exp(u * math.log(y)) * ratio * math.log(x / y)


def zeta(s, terms: int = None):
    """Riemann zeta by Euler-Maclaurin with N = max(20, ceil|Im s| + 10) direct terms"""
    terms = settings.EM_BERNOULLI_TERMS if terms is None else terms
    ss, scalar = _prepare(s)
    if np.any(ss == 1.0):
        raise ZetaPoleError("zeta has a simple pole at s = 1")

    n = _cutoff(ss)
    head = _power_sum(ss, np.arange(1, n, dtype=np.float64))
    result = head + np.exp((1.0 - ss) * math.log(n)) / (ss - 1.0) + _em_tail(ss, float(n), terms)
    check_finite(result, "zeta")
    return complex(result[0]) if scalar else result


def hurwitz_zeta(s, q: float, terms: int = None):
    """Hurwitz zeta(s, q) for 0 < q <= 1, s != 1"""
    terms = settings.EM_BERNOULLI_TERMS if terms is None else terms
    ss, scalar = _prepare(s)
    if np.any(ss == 1.0):
        raise ZetaPoleError("Hurwitz zeta has a simple pole at s = 1")

    n = _cutoff(ss)
    x = n + q
    head = _power_sum(ss, np.arange(n, dtype=np.float64) + q)
    result = head + np.exp((1.0 - ss) * math.log(x)) / (ss - 1.0) + _em_tail(ss, x, terms)
    check_finite(result, "hurwitz_zeta")
    return complex(result[0]) if scalar else result


def dirichlet_L_chi4(s, terms: int = None):
    """L(s, chi_-4) = 4^{-s} (zeta(s, 1/4) - zeta(s, 3/4)); entire, so the pole terms cancel exactly"""
    terms = settings.EM_BERNOULLI_TERMS if terms is None else terms
    ss, scalar = _prepare(s)

    n = _cutoff(ss)
    k = np.arange(n, dtype=np.float64)
    head = _power_sum(ss, k + 0.25) - _power_sum(ss, k + 0.75)
    x, y = n + 0.25, n + 0.75
    tail = _pole_difference(ss, x, y) + _em_tail(ss, x, terms) - _em_tail(ss, y, terms)
    result = np.exp(-ss * math.log(4.0)) * (head + tail)
    check_finite(result, "dirichlet_L_chi4")
    return complex(result[0]) if scalar else result
