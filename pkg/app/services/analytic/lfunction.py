"""
Completed L-functions: gamma data, functional-equation rotation and zero counting
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Dict, Tuple

import numpy as np

from app.services.analytic.gamma import lngamma, GammaPoleError, check_finite
from app.services.analytic.zeta import zeta, dirichlet_L_chi4, ZetaPoleError

logger = logging.getLogger(__name__)


class LFunctionPoleError(ValueError):
    """Completed L-function evaluated at a pole"""


class LFunctionSpecError(ValueError):
    """Malformed L-function definition"""


GammaFactor = Tuple[Fraction, complex]  # Gamma(scale * s + shift)


@dataclass(frozen=True)
class LFunctionSpec:
    """Lambda(s) = Q^s * prod Gamma(scale_i s + shift_i) * L(s)"""
    name: str
    degree: int
    gamma_factors: Tuple[GammaFactor, ...]
    conductor_power_base: float  # the Q in Q^s
    coefficient: Callable[[int], float]  # n -> a(n)
    evaluator: Callable  # vectorised s -> L(s)
    pole_locations: Tuple[complex, ...] = ()

    def __post_init__(self):
        if self.degree < 1:
            raise LFunctionSpecError(f"{self.name}: degree must be positive")
        if self.degree != len(self.gamma_factors):
            raise LFunctionSpecError(
                f"{self.name}: degree {self.degree} but {len(self.gamma_factors)} gamma factors"
            )
        if self.coefficient(1) != 1:
            raise LFunctionSpecError(f"{self.name}: a(1) must equal 1")
        if self.conductor_power_base <= 0:
            raise LFunctionSpecError(f"{self.name}: conductor base must be positive")

    def L(self, s):
        return self.evaluator(s)


def _chi4(n: int) -> float:
    return (0.0, 1.0, 0.0, -1.0)[n % 4]


def _gaussian_coefficient(n: int) -> float:
    # number of ideals of norm n in Z[i]
    return float(sum(_chi4(d) for d in range(1, n + 1) if n % d == 0))


def dedekind_gaussian(s):
    """Dedekind zeta of Q(i), factored as zeta(s) L(s, chi_-4)"""
    return zeta(s) * dirichlet_L_chi4(s)


ZETA = LFunctionSpec(
    name="zeta",
    degree=1,
    gamma_factors=((Fraction(1, 2), 0j),),
    conductor_power_base=math.pi ** -0.5,
    coefficient=lambda n: 1.0,
    evaluator=zeta,
    pole_locations=(1 + 0j,),
)

CHI4 = LFunctionSpec(
    name="chi4",
    degree=1,
    gamma_factors=((Fraction(1, 2), 0.5 + 0j),),
    conductor_power_base=2.0 / math.sqrt(math.pi),
    coefficient=_chi4,
    evaluator=dirichlet_L_chi4,
)

# (2/pi)^s Gamma(s/2) Gamma((s+1)/2) is the product of the two factors above; the
# usual pi^{-s} Gamma(s) normalisation differs from it by the constant 2 sqrt(pi).
DEDEKIND = LFunctionSpec(
    name="dedekind",
    degree=2,
    gamma_factors=((Fraction(1, 2), 0j), (Fraction(1, 2), 0.5 + 0j)),
    conductor_power_base=2.0 / math.pi,
    coefficient=_gaussian_coefficient,
    evaluator=dedekind_gaussian,
    pole_locations=(1 + 0j,),
)

BUILTIN_SPECS: Dict[str, LFunctionSpec] = {spec.name: spec for spec in (ZETA, CHI4, DEDEKIND)}


def _check_poles(spec: LFunctionSpec, ss: np.ndarray) -> None:
    for pole in spec.pole_locations:
        if np.any(ss == pole):
            raise LFunctionPoleError(f"{spec.name} has a pole at s = {pole}")


def log_gamma_factor(spec: LFunctionSpec, s):
    """s log Q + sum log Gamma(scale s + shift)"""
    ss = np.asarray(s, dtype=np.complex128)
    total = ss * math.log(spec.conductor_power_base)
    for scale, shift in spec.gamma_factors:
        try:
            total = total + lngamma(float(scale) * ss + shift)
        except GammaPoleError as e:
            raise LFunctionPoleError(f"{spec.name}: gamma factor pole near s = {s} ({e})") from e
    return total


def completed(spec: LFunctionSpec, s):
    """Lambda(s) = Q^s prod Gamma(scale_i s + shift_i) L(s)"""
    ss = np.asarray(s, dtype=np.complex128)
    _check_poles(spec, np.atleast_1d(ss))
    try:
        value = np.exp(log_gamma_factor(spec, ss)) * spec.L(ss)
    except ZetaPoleError as e:
        raise LFunctionPoleError(f"{spec.name} has a pole at s = {s}") from e
    check_finite(value, f"completed({spec.name})")
    return complex(value) if np.ndim(value) == 0 else value


def xi(s):
    return completed(ZETA, s)


def theta_function(spec: LFunctionSpec, t):
    """Rotation angle making exp(i theta(t)) L(1/2 + it) real for self-dual specs"""
    tt = np.asarray(t, dtype=np.float64)
    s = 0.5 + 1j * tt
    total = tt * math.log(spec.conductor_power_base)
    for scale, shift in spec.gamma_factors:
        total = total + np.imag(lngamma(float(scale) * s + shift))
    return float(total) if np.ndim(total) == 0 else total


def hardy_z(spec: LFunctionSpec, t):
    """Real-valued rotation Re(exp(i theta(t)) L(1/2 + it)) whose sign changes are zeros"""
    tt = np.asarray(t, dtype=np.float64)
    value = np.real(np.exp(1j * theta_function(spec, tt)) * spec.L(0.5 + 1j * tt))
    return float(value) if np.ndim(value) == 0 else value


def riemann_von_mangoldt(spec: LFunctionSpec, T):
    """Smooth zero count up to height T: theta(T)/pi plus one per pole"""
    return theta_function(spec, T) / math.pi + len(spec.pole_locations)


def load_lfunction_spec(path: Path) -> LFunctionSpec:
    """Read a user L-function definition.

    Header lines ``# name:``, ``# degree:``, ``# gamma: scale,shift_re,shift_im`` (one
    per factor), ``# conductor: Q`` and optional ``# poles: re,im``, followed by
    ``n,a(n)`` rows. L is evaluated by direct Dirichlet summation, so it is only
    meaningful for Re s > 1.
    """
    path = Path(path)
    header: Dict[str, list] = {}
    coefficients: Dict[int, float] = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, sep, value = line[1:].partition(":")
            if not sep:
                continue
            header.setdefault(key.strip().lower(), []).append(value.strip())
            continue
        try:
            n_text, a_text = line.split(",")
            coefficients[int(n_text)] = float(a_text)
        except ValueError as e:
            raise LFunctionSpecError(f"{path}:{lineno}: expected 'n,a(n)', got {line!r}") from e

    for required in ("name", "degree", "gamma", "conductor"):
        if required not in header:
            raise LFunctionSpecError(f"{path}: missing '# {required}:' header")
    if not coefficients:
        raise LFunctionSpecError(f"{path}: no coefficient rows")

    try:
        gamma_factors = []
        for entry in header["gamma"]:
            scale, shift_re, shift_im = (part.strip() for part in entry.split(","))
            gamma_factors.append((Fraction(scale), complex(float(shift_re), float(shift_im))))
        poles = []
        for entry in header.get("poles", []):
            re, im = (float(part) for part in entry.split(","))
            poles.append(complex(re, im))
        degree = int(header["degree"][0])
        conductor = float(header["conductor"][0])
    except ValueError as e:
        raise LFunctionSpecError(f"{path}: malformed header ({e})") from e

    ns = np.array(sorted(coefficients), dtype=np.float64)
    an = np.array([coefficients[int(n)] for n in ns])
    log_ns = np.log(ns)

    def evaluator(s):
        ss = np.asarray(s, dtype=np.complex128)
        values = np.exp(-np.multiply.outer(ss, log_ns)) @ an
        return complex(values) if np.ndim(values) == 0 else values

    spec = LFunctionSpec(
        name=header["name"][0],
        degree=degree,
        gamma_factors=tuple(gamma_factors),
        conductor_power_base=conductor,
        coefficient=lambda n: coefficients.get(n, 0.0),
        evaluator=evaluator,
        pole_locations=tuple(poles),
    )
    logger.info(f"Loaded L-function '{spec.name}' with {len(coefficients)} coefficients from {path}")
    return spec
