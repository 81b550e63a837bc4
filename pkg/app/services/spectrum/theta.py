"""
Theta-period providers and their zeros on the critical line
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from app.core.config import settings
from app.core.exceptions import UsageError
from app.services.analytic import precision
from app.services.analytic.lfunction import CHI4, ZETA, LFunctionSpec, dedekind_gaussian, hardy_z
from app.services.analytic.zeta import zeta

logger = logging.getLogger(__name__)


class UnknownProviderError(UsageError):
    """No theta provider with this name"""


@dataclass(frozen=True)
class ThetaProvider:
    name: str
    evaluator: Callable  # vectorised s -> theta E_s
    zero_factors: Tuple[LFunctionSpec, ...] = ()  # critical zeros of these are the zeros of theta E on the line
    extended_evaluator: Optional[Callable] = None  # mpmath version, s -> mpc

    def __call__(self, s):
        return self.evaluator(s)

    def line_values(self, t, extended: bool = False) -> np.ndarray:
        tt = np.atleast_1d(np.asarray(t, dtype=np.float64))
        if extended:
            if self.extended_evaluator is None:
                raise UsageError(f"provider '{self.name}' has no extended-precision evaluator")
            with precision.extended():
                return np.array([complex(self.extended_evaluator(complex(0.5, x))) for x in tt])
        return np.asarray(self.evaluator(0.5 + 1j * tt), dtype=np.complex128)


def _delta_at_i(s):
    """Evaluation at the point i: zeta_{Q(i)}(s) / zeta(2s)"""
    ss = np.asarray(s, dtype=np.complex128)
    return dedekind_gaussian(ss) / zeta(2.0 * ss)


DELTA_AT_I = ThetaProvider(
    name="delta-at-i",
    evaluator=_delta_at_i,
    zero_factors=(ZETA, CHI4),
    extended_evaluator=precision.mp_theta_period,
)

PROVIDERS: Dict[str, ThetaProvider] = {DELTA_AT_I.name: DELTA_AT_I}


def get_provider(name: str) -> ThetaProvider:
    try:
        return PROVIDERS[name]
    except KeyError:
        raise UnknownProviderError(f"unknown theta provider '{name}'; choose from {sorted(PROVIDERS)}") from None


@lru_cache(maxsize=32)
def critical_zeros(spec: LFunctionSpec, t_max: float, step: float = None) -> Tuple[float, ...]:
    """Zeros of L(1/2 + it) on (0, t_max] from sign changes of the rotated real function"""
    step = settings.THETA_ZERO_STEP if step is None else step
    grid = np.arange(step, t_max + step / 2, step)
    values = hardy_z(spec, grid)
    found = []
    for k in np.flatnonzero(np.sign(values[:-1]) * np.sign(values[1:]) < 0):
        found.append(brentq(lambda t: hardy_z(spec, t), grid[k], grid[k + 1], xtol=1e-13))
    found.extend(float(grid[k]) for k in np.flatnonzero(values == 0))
    logger.info(f"Located {len(found)} critical zeros of {spec.name} up to t={t_max}")
    return tuple(sorted(found))


def theta_zeros(provider: ThetaProvider, t_max: float, step: float = None) -> np.ndarray:
    """Zeros of t -> theta E_{1/2+it}, merged over the provider's factors"""
    merged = []
    for spec in provider.zero_factors:
        merged.extend(critical_zeros(spec, float(t_max), step))
    return np.array(sorted(merged))


def combined_counting(provider: ThetaProvider) -> Callable:
    """Smooth counting function of theta_zeros, used to unfold them"""
    from app.services.analytic.lfunction import riemann_von_mangoldt

    def counting(t):
        return sum(riemann_von_mangoldt(spec, t) for spec in provider.zero_factors)

    return counting
