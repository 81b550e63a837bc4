"""
Maass-Selberg inner products of truncated Eisenstein series in the GL(2) model
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence, Tuple

import mpmath
import numpy as np

from app.core.config import settings
from app.core.exceptions import InvariantViolationError
from app.core.monitoring import monitor_function
from app.services.analytic import precision
from app.services.analytic.extrapolation import extrapolate_limit, richardson
from app.services.scattering import ScatteringDatum, get_datum

logger = logging.getLogger(__name__)

LIMIT_EPSILONS = (1e-3, 5e-4, 2.5e-4)
RESIDUE_EPSILONS = (1e-2, 5e-3, 2.5e-3)
RESIDUE_STABILITY_TOL = 1e-3
DEFAULT_DATA = (1 + 0j, 1 + 0j, 1 + 0j, 1 + 0j)


class DegenerateExponentError(ValueError):
    """An exponent of the four-term formula vanishes; use truncated_norm_sq"""


class NonHermitianDataError(ValueError):
    """Cuspidal-data inner products are not Hermitian under the swap"""


class ResidueExtrapolationError(InvariantViolationError):
    """The residue of c at s = 1 could not be extrapolated stably, or is not positive"""


@dataclass(frozen=True)
class MSContext:
    """Truncation height and the cuspidal-data inner products

    data = (<g1,g2>, <g1,g2^w>, <g1^w,g2>, <g1^w,g2^w>); the desk default is all ones.
    """
    T: float
    scattering: ScatteringDatum = field(default_factory=get_datum, compare=False)
    data: Tuple[complex, complex, complex, complex] = DEFAULT_DATA

    def __post_init__(self):
        if not self.T > 1:
            raise ValueError(f"truncation height must exceed 1, got {self.T}")
        d11, d12, d21, d22 = (complex(d) for d in self.data)
        if abs(d11.imag) > 1e-12 or abs(d22.imag) > 1e-12 or abs(d21 - d12.conjugate()) > 1e-12:
            raise NonHermitianDataError(f"data matrix {self.data} is not Hermitian")

    @property
    def is_default(self) -> bool:
        return tuple(complex(d) for d in self.data) == DEFAULT_DATA


def ms_inner_product(ctx: MSContext, s: complex, r: complex) -> complex:
    """Four-term Maass-Selberg formula for <trunc E_s, trunc E_r>"""
    s, r = complex(s), complex(r)
    rb = r.conjugate()
    exponents = (s + rb - 1.0, s - rb, rb - s, 1.0 - s - rb)
    if any(abs(e) < 1e-14 for e in exponents):
        raise DegenerateExponentError(
            f"degenerate exponent at s={s}, r={r}; use truncated_norm_sq for the diagonal"
        )
    c_s = ctx.scattering.c(s)
    c_rb = ctx.scattering.c(r).conjugate()
    d11, d12, d21, d22 = ctx.data
    log_T = math.log(ctx.T)
    coefficients = (d11, d12 * c_rb, d21 * c_s, d22 * c_s * c_rb)
    return complex(sum(k * np.exp(e * log_T) / e for k, e in zip(coefficients, exponents)))


def truncated_norm_sq(ctx: MSContext, t: float) -> float:
    """||trunc E_{1/2+it}||^2 = d11 (2 log T - psi'(t)) + Im(d12 e^{iZ}) / t"""
    if t <= 0:
        raise ValueError("truncated norm needs t > 0")
    d11, d12, _, d22 = ctx.data
    if abs(complex(d11) - complex(d22)) > 1e-12:
        raise DegenerateExponentError("the diagonal limit exists only when <g1,g2> = <g1^w,g2^w>")
    total_phase = float(ctx.scattering.total_phase(ctx.T, t))
    slope = float(ctx.scattering.total_phase_derivative(ctx.T, t))
    return float(complex(d11).real * slope + (complex(d12) * np.exp(1j * total_phase)).imag / t)


def extrapolated_norm_sq(ctx: MSContext, t: float, epsilons: Sequence[float] = LIMIT_EPSILONS) -> complex:
    """Richardson limit of ms_inner_product(1/2+it, 1/2+i(t+eps)) as eps -> 0"""
    s = 0.5 + 1j * t
    return extrapolate_limit(lambda eps: ms_inner_product(ctx, s, 0.5 + 1j * (t + eps)), epsilons)


@dataclass
class ResidueReport:
    residue: float
    imaginary_part: float
    tableau: list
    at_small_eps: float  # (s-1) c(s) at s = 1 + 1e-6
    precision: str
    data_note: str


def _residue_sequence(ctx: MSContext, extended: bool):
    if extended:
        with precision.extended():
            values = [complex(mpmath.mpf(e) * precision.mp_scattering(1 + mpmath.mpf(e))) for e in RESIDUE_EPSILONS]
            small = complex(mpmath.mpf("1e-6") * precision.mp_scattering(1 + mpmath.mpf("1e-6")))
        return values, small
    values = [e * ctx.scattering.c(1.0 + e) for e in RESIDUE_EPSILONS]
    return values, 1e-6 * ctx.scattering.c(1.0 + 1e-6)


@monitor_function("maass_selberg.residue_norm_check")
def residue_norm_check(ctx: MSContext, extended: bool = False) -> ResidueReport:
    """Res_{s=1} c(s), the residual-spectrum norm in this model; must be real and positive"""
    values, small = _residue_sequence(ctx, extended)
    tableau = richardson(values, ratio=2.0)
    if abs(tableau[-1] - tableau[-2]) > RESIDUE_STABILITY_TOL:
        logger.error(f"Residue extrapolation unstable: {tableau}")
        raise ResidueExtrapolationError(
            f"residue estimates {tableau[-2]} and {tableau[-1]} disagree"
        )
    residue = complex(tableau[-1])
    if residue.real <= 0:
        logger.error(f"Non-positive residue {residue}")
        raise ResidueExtrapolationError(f"residue {residue} is not positive")
    report = ResidueReport(
        residue=residue.real,
        imaginary_part=residue.imag,
        tableau=[complex(v).real for v in tableau],
        at_small_eps=complex(small).real,
        precision="extended" if extended else "double",
        data_note="desk default: all data inner products = 1" if ctx.is_default else f"data = {ctx.data}",
    )
    logger.info(f"Residue of c at s=1: {report.residue:.12f} ({report.precision})")
    return report


def norm_check(ctx: MSContext, t: float) -> dict:
    """Closed form against the extrapolated four-term formula at one height"""
    closed = truncated_norm_sq(ctx, t)
    extrapolated = extrapolated_norm_sq(ctx, t)
    return {
        "T": ctx.T,
        "t": t,
        "closed_form": closed,
        "extrapolated": extrapolated.real,
        "extrapolated_imag": extrapolated.imag,
        "residual": abs(extrapolated - closed),
        "fd_error": ctx.scattering.phase_derivative_error(t),
        "data": "desk default: all data inner products = 1" if ctx.is_default else str(ctx.data),
        "fd_step": settings.PHASE_FD_STEP,
    }
