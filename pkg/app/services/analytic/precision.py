"""
Extended-precision counterparts built on mpmath

Used as oracles in tests and by the ``extended`` precision mode.
"""
import logging
from contextlib import contextmanager

import mpmath

from app.core.config import settings

logger = logging.getLogger(__name__)

CHI4_CHARACTER = [0, 1, 0, -1]


class UnknownSpecError(KeyError):
    """No extended-precision evaluator for this L-function"""


@contextmanager
def extended(dps: int = None):
    with mpmath.workdps(dps or settings.EXTENDED_DPS):
        yield


def mp_lngamma(z):
    return mpmath.loggamma(mpmath.mpc(z))


def mp_L(name: str, s):
    s = mpmath.mpc(s)
    if name == "zeta":
        return mpmath.zeta(s)
    if name == "chi4":
        return mpmath.dirichlet(s, CHI4_CHARACTER)
    if name == "dedekind":
        return mpmath.zeta(s) * mpmath.dirichlet(s, CHI4_CHARACTER)
    raise UnknownSpecError(name)


def mp_completed(spec, s):
    s = mpmath.mpc(s)
    value = mpmath.power(mpmath.mpf(spec.conductor_power_base), s)
    for scale, shift in spec.gamma_factors:
        value *= mpmath.gamma(mpmath.mpf(scale.numerator) / scale.denominator * s + mpmath.mpc(shift))
    return value * mp_L(spec.name, s)


def mp_xi(s):
    s = mpmath.mpc(s)
    return mpmath.power(mpmath.pi, -s / 2) * mpmath.gamma(s / 2) * mpmath.zeta(s)


def mp_scattering(s):
    """c(s) = xi(2 - 2s) / xi(2s)"""
    s = mpmath.mpc(s)
    return mp_xi(2 - 2 * s) / mp_xi(2 * s)


def mp_theta_period(s):
    """zeta_{Q(i)}(s) / zeta(2s)"""
    s = mpmath.mpc(s)
    return mp_L("dedekind", s) / mpmath.zeta(2 * s)