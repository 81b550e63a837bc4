"""
Spectral line of the truncated constant term and the secular equation theta v_w = 0

Between consecutive zeros t_j < t_{j+1} the function

    theta_v(tau) = sum_j w_j / (lambda_j - lambda_w) + tail,   w = 1/2 + i tau

runs from +inf down to -inf, so it has exactly one root per bracket. The weights are
w_j = |theta E_{s_j}|^2 / ||trunc E_{s_j}||^2.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Callable, List, Optional, Tuple

import numpy as np
import sympy
from scipy.optimize import brentq
from tenacity import RetryError, Retrying, retry_if_exception_type, stop_after_attempt

from app.core.config import settings
from app.core.exceptions import InvariantViolationError, ThetaspecError, UsageError
from app.core.monitoring import monitor_function, record_height_adjustment, record_roots
from app.services.maass_selberg import MSContext, truncated_norm_sq
from app.services.scattering import ConstantTermZero, ScatteringDatum, get_datum, smooth_count, zeros
from app.services.spectrum.theta import DELTA_AT_I, ThetaProvider, get_provider
from app.services.symbolic.presets import s as S_SYM, sf as SF_SYM

logger = logging.getLogger(__name__)

POLE_GUARD = 1e-6
RESIDUAL_TOL = 1e-7


class ThetaVanishingError(ThetaspecError):
    """The theta period vanishes at a zero of the constant term"""


class HeightAdjustmentExhaustedError(ThetaspecError):
    """Every perturbed truncation height still hit a vanishing theta period"""


class PoleProximityError(UsageError):
    """theta_v requested too close to one of its poles"""


class NoSignChangeError(InvariantViolationError):
    """theta_v kept one sign on a bracket, contradicting interlacing"""


class InterlacingViolationError(InvariantViolationError):
    """A root left its bracket or the line lost its ordering"""


class SimplicityViolationError(InvariantViolationError):
    """Derivative certificate not positive at a root"""


class NonPositiveNormError(InvariantViolationError):
    """A truncated norm at a constant-term zero is not positive"""


# -- eigenvalue models --------------------------------------------------------

class LambdaModel(str, Enum):
    GL2 = "gl2"
    GL4 = "gl4"


@lru_cache(maxsize=None)
def _polynomial(model: LambdaModel) -> sympy.Expr:
    if model is LambdaModel.GL2:
        return sympy.expand(S_SYM * (S_SYM - 1))
    from app.services.symbolic.liealg import casimir, infinitesimal_character
    from app.services.symbolic.presets import preset

    return infinitesimal_character(casimir(4), preset("interleaved"))


@lru_cache(maxsize=None)
def _numeric(model: LambdaModel) -> Tuple[Callable, float]:
    poly = _polynomial(model)
    leading = float(sympy.Poly(poly, S_SYM).LC())
    return sympy.lambdify((S_SYM, SF_SYM), poly, "numpy"), leading


def lambda_of(s, model="gl2", sf=0.0):
    """Casimir eigenvalue lambda(s); gl2 is s(s-1), gl4 the Casimir scalar of I(s+sf, -s+sf, s-sf, -s-sf)"""
    model = LambdaModel(model)
    if isinstance(s, sympy.Basic) or isinstance(sf, sympy.Basic):
        return sympy.expand(_polynomial(model).subs({S_SYM: s, SF_SYM: sf}, simultaneous=True))
    fn, _ = _numeric(model)
    value = np.asarray(fn(np.asarray(s, dtype=np.complex128), sf), dtype=np.complex128)
    return complex(value) if value.ndim == 0 else value


def lambda_scale(model="gl2") -> float:
    """Leading coefficient A: lambda(1/2 + i t) = const - A t^2"""
    return _numeric(LambdaModel(model))[1]


# -- spectral line ----------------------------------------------------------

@dataclass(eq=False)
class SpectralLine:
    a: float
    zeros: List[ConstantTermZero]
    theta_values: np.ndarray  # theta E at s_j
    norm_sq: np.ndarray
    weights: np.ndarray
    eigenvalues: np.ndarray
    provider: str = DELTA_AT_I.name
    model: LambdaModel = LambdaModel.GL2
    sf: float = 0.0
    precision: str = "double"
    requested_a: float = None
    adjustments: int = 0
    tail_terms: int = field(default_factory=lambda: settings.TAIL_FIT_TERMS)
    metadata: dict = field(default_factory=dict)

    @property
    def t(self) -> np.ndarray:
        return np.array([z.t for z in self.zeros])

    def __len__(self) -> int:
        return len(self.zeros)

    def truncated(self, n_terms: int) -> "SpectralLine":
        """The same line keeping only its first n_terms zeros"""
        if not 2 <= n_terms <= len(self):
            raise UsageError(f"cannot keep {n_terms} of {len(self)} terms")
        return SpectralLine(
            a=self.a, zeros=self.zeros[:n_terms], theta_values=self.theta_values[:n_terms],
            norm_sq=self.norm_sq[:n_terms], weights=self.weights[:n_terms],
            eigenvalues=self.eigenvalues[:n_terms], provider=self.provider, model=self.model, sf=self.sf,
            precision=self.precision, requested_a=self.requested_a, adjustments=self.adjustments,
            tail_terms=self.tail_terms, metadata=dict(self.metadata),
        )


def _build_once(a: float, t_max: float, theta: ThetaProvider, datum: ScatteringDatum, model: LambdaModel,
                sf: float, extended: bool, reflected: bool, tail_terms: int) -> SpectralLine:
    zero_list = zeros(a, t_max, datum)
    if len(zero_list) < 2:
        raise UsageError(f"need at least two constant-term zeros below t_max={t_max}, found {len(zero_list)}")
    ts = np.array([z.t for z in zero_list])

    values = theta.line_values(-ts if reflected else ts, extended=extended)
    vanishing = np.flatnonzero(np.abs(values) < settings.THETA_VANISH_TOL)
    if vanishing.size:
        k = int(vanishing[0])
        raise ThetaVanishingError(f"|theta E| = {abs(values[k]):.3e} at t_{k + 1} = {ts[k]:.12f} (a={a})")

    ctx = MSContext(T=a, scattering=datum)
    norms = np.array([truncated_norm_sq(ctx, t) for t in ts])
    if np.any(norms <= 0):
        k = int(np.flatnonzero(norms <= 0)[0])
        logger.error(f"Non-positive truncated norm {norms[k]} at t={ts[k]}")
        raise NonPositiveNormError(f"truncated norm {norms[k]} <= 0 at t = {ts[k]}")

    weights = np.abs(values) ** 2 / norms
    eigenvalues = np.real(lambda_of(0.5 + 1j * ts, model, sf))
    if np.any(np.diff(eigenvalues) >= 0):
        logger.error("Eigenvalues along the line are not strictly decreasing")
        raise InterlacingViolationError("lambda(s_j) must decrease strictly in j")

    return SpectralLine(
        a=a, zeros=zero_list, theta_values=values, norm_sq=norms, weights=weights, eigenvalues=eigenvalues,
        provider=theta.name, model=model, sf=sf, precision="extended" if extended else "double",
        tail_terms=tail_terms,
        metadata={"weight_point": "1 - s_j" if reflected else "s_j",
                  "weight_symmetry": "|theta E(1 - s_j)| = |theta E(s_j)| on the line since |c| = 1"},
    )


@monitor_function("spectrum.build_line")
def build_line(a: float, t_max: float, theta: ThetaProvider = DELTA_AT_I, precision: str = "double",
               datum: Optional[ScatteringDatum] = None, model="gl2", sf: float = 0.0,
               reflected: bool = False, tail_terms: Optional[int] = None) -> SpectralLine:
    """Zeros, truncated norms and weights at height a, raising a by ADJUST_FACTOR while theta E vanishes"""
    if not a > 1:
        raise UsageError(f"truncation height a must exceed 1, got {a}")
    if precision not in ("double", "extended"):
        raise UsageError(f"unknown precision '{precision}'")
    datum = datum if datum is not None else get_datum()
    tail_terms = settings.TAIL_FIT_TERMS if tail_terms is None else tail_terms
    model = LambdaModel(model)

    line = None
    try:
        for attempt in Retrying(stop=stop_after_attempt(settings.ADJUST_RETRIES + 1),
                                retry=retry_if_exception_type(ThetaVanishingError)):
            with attempt:
                bump = attempt.retry_state.attempt_number - 1
                height = a * settings.ADJUST_FACTOR ** bump
                if bump:
                    record_height_adjustment()
                    logger.warning(f"theta E vanished at a constant-term zero; retrying with a={height:.6f}")
                line = _build_once(height, t_max, theta, datum, model, sf, precision == "extended",
                                   reflected, tail_terms)
                line.requested_a, line.adjustments = a, bump
    except RetryError as e:
        cause = e.last_attempt.exception()
        logger.error(f"Height adjustment exhausted after {settings.ADJUST_RETRIES} retries: {cause}")
        raise HeightAdjustmentExhaustedError(
            f"theta E vanishes at a zero for every height a * {settings.ADJUST_FACTOR}^k, k <= {settings.ADJUST_RETRIES}"
        ) from cause

    logger.info(f"Built spectral line at a={line.a} with {len(line)} zeros ({line.precision})")
    return line


# -- theta_v ----------------------------------------------------------------

def tail_model(line: SpectralLine) -> Tuple[float, float]:
    """(K, u0): tail density-times-weight K and the start u0 of the modelled continuation"""
    m = max(1, min(line.tail_terms, len(line)))
    K = float(np.mean(np.abs(line.theta_values[-m:]) ** 2)) / (2.0 * math.pi)
    u0 = float(line.zeros[-1].t + math.pi / line.norm_sq[-1])
    return K, u0


def _tail(line: SpectralLine, sigma: complex) -> complex:
    K, u0 = tail_model(line)
    if np.imag(sigma) == 0 and abs(sigma) >= u0:
        raise UsageError(f"tau={sigma} lies beyond the modelled tail start {u0:.6f}")
    if abs(sigma) < 1e-8 * u0:
        return -K / u0 / lambda_scale(line.model)
    value = (np.log(u0 + sigma) - np.log(u0 - sigma)) / (2.0 * sigma)
    return -K * complex(value) / lambda_scale(line.model)


def _tail_slope(line: SpectralLine, tau: float) -> float:
    """d/dtau of arctanh(tau/u0)/tau, times K/A"""
    K, u0 = tail_model(line)
    if tau < 1e-3 * u0:
        slope = 2.0 * tau / (3.0 * u0 ** 3)
    else:
        slope = (tau * u0 / (u0 ** 2 - tau ** 2) - math.atanh(tau / u0)) / tau ** 2
    return K * slope / lambda_scale(line.model)


def _differences(line: SpectralLine, w: complex) -> np.ndarray:
    return line.eigenvalues - lambda_of(w, line.model, line.sf)


def _theta_v(line: SpectralLine, tau: float, include_tail: bool = True) -> float:
    value = float(np.sum(line.weights / np.real(_differences(line, complex(0.5, tau)))))
    if include_tail:
        value += _tail(line, tau).real
    return value


def theta_v(line: SpectralLine, tau: float, include_tail: bool = True) -> float:
    """theta v at w = 1/2 + i tau, real for real tau"""
    ts = line.t
    k = int(np.argmin(np.abs(ts - tau)))
    if abs(ts[k] - tau) < POLE_GUARD:
        raise PoleProximityError(f"tau={tau} is within {POLE_GUARD:g} of the pole t_{k + 1}={ts[k]}")
    return _theta_v(line, tau, include_tail)


def theta_v_complex(line: SpectralLine, w: complex, include_tail: bool = True) -> complex:
    """theta v at a general w; sigma = -i(w - 1/2) is the line coordinate"""
    w = complex(w)
    value = complex(np.sum(line.weights / _differences(line, w)))
    if include_tail:
        value += _tail(line, -1j * (w - 0.5))
    return value


def derivative_certificate(line: SpectralLine, tau: float) -> float:
    """-d(theta v)/dtau = sum_j w_j 2 A tau / (lambda_j - lambda_w)^2 + tail term, a sum of positives"""
    diffs = np.real(_differences(line, complex(0.5, tau)))
    return float(np.sum(line.weights * 2.0 * lambda_scale(line.model) * tau / diffs ** 2)) + _tail_slope(line, tau)


def off_line_check(line: SpectralLine, w: complex) -> dict:
    """Im theta v_w against the largest single-term imaginary part, for Re w != 1/2"""
    terms = line.weights / _differences(line, complex(w))
    total = theta_v_complex(line, w)
    largest = float(np.max(np.abs(terms.imag)))
    return {
        "w": complex(w),
        "imag": total.imag,
        "largest_term_imag": largest,
        "bounded_away": abs(total.imag) >= largest * (1 - 1e-12),
    }


# -- roots ------------------------------------------------------------------

@dataclass(frozen=True)
class DiscreteRoot:
    index: int
    tau: float
    bracket: Tuple[float, float]
    residual: float  # |theta_v(tau)| relative to the adjacent pole terms
    deriv_cert: float

    @property
    def eigenvalue(self) -> float:
        # gl2 normalisation
        return -0.25 - self.tau ** 2


def _inner_endpoint(f, pole: float, width: float, direction: int, want_positive: bool) -> float:
    delta = 1e-2 * width
    floor = 1e-12 * max(1.0, abs(pole))
    while delta >= floor:
        x = pole + direction * delta
        if (f(x) > 0) == want_positive:
            return x
        delta /= 10.0
    raise NoSignChangeError(f"theta_v has no {'positive' if want_positive else 'negative'} side next to {pole}")


def _local_scale(line: SpectralLine, j: int, tau: float) -> float:
    diffs = np.real(_differences(line, complex(0.5, tau)))
    return float(max(abs(line.weights[j] / diffs[j]), abs(line.weights[j + 1] / diffs[j + 1])))


def solve_bracket(line: SpectralLine, j: int) -> DiscreteRoot:
    """The root of theta_v in (t_j, t_{j+1}), j counted from 0"""
    lo, hi = line.zeros[j].t, line.zeros[j + 1].t
    width = hi - lo

    def f(tau):
        return _theta_v(line, tau)

    try:
        left = _inner_endpoint(f, lo, width, +1, True)
        right = _inner_endpoint(f, hi, width, -1, False)
        tau = brentq(f, left, right, xtol=1e-12, rtol=4 * np.finfo(float).eps)
    except (NoSignChangeError, ValueError) as e:
        logger.error(f"No sign change of theta_v on bracket {j + 1} ({lo}, {hi}): {e}")
        raise NoSignChangeError(f"theta_v has no root on ({lo}, {hi})") from e

    if not lo < tau < hi:
        logger.error(f"Root {tau} escaped bracket ({lo}, {hi})")
        raise InterlacingViolationError(f"root {tau} outside ({lo}, {hi})")
    cert = derivative_certificate(line, tau)
    if not cert > 0:
        logger.error(f"Derivative certificate {cert} at root {tau}")
        raise SimplicityViolationError(f"derivative certificate {cert} <= 0 at tau = {tau}")
    residual = abs(f(tau)) / _local_scale(line, j, tau)
    if residual > RESIDUAL_TOL:
        logger.warning(f"Root residual {residual:.2e} on bracket {j + 1} exceeds {RESIDUAL_TOL:g}")
    return DiscreteRoot(index=j + 1, tau=float(tau), bracket=(lo, hi), residual=residual, deriv_cert=cert)


@monitor_function("spectrum.discrete_roots")
def discrete_roots(line: SpectralLine, brackets: Optional[int] = None) -> List[DiscreteRoot]:
    """One root per adjacent-zero bracket, optionally only the first few brackets"""
    if len(line) < 2:
        raise UsageError("discrete_roots needs a line with at least two zeros")
    count = len(line) - 1 if brackets is None else min(brackets, len(line) - 1)
    roots = [solve_bracket(line, j) for j in range(count)]
    record_roots(len(roots))
    logger.info(f"Solved {len(roots)} roots of theta_v at a={line.a}")
    return roots


@dataclass
class TailStabilityReport:
    base_terms: int
    compared: int
    comparison_t_max: float
    tolerance: float
    same_count: bool
    all_interior: bool
    relative_moves: np.ndarray  # |tau_2J - tau_J| / bracket width
    absolute_moves: np.ndarray
    verdict: str

    @property
    def median_relative_move(self) -> float:
        return float(np.median(self.relative_moves)) if self.relative_moves.size else 0.0

    @property
    def max_relative_move(self) -> float:
        return float(np.max(self.relative_moves)) if self.relative_moves.size else 0.0

    @property
    def max_absolute_move(self) -> float:
        return float(np.max(self.absolute_moves)) if self.absolute_moves.size else 0.0


def _doubled_line(line: SpectralLine, datum: ScatteringDatum) -> Tuple[SpectralLine, float]:
    """The same height, provider and model carried to the first t_max holding twice the zeros"""
    target = 2 * len(line)
    t_max = float(line.t[-1])
    while smooth_count(line.a, t_max) < target + 1:
        t_max *= 1.05
    theta = get_provider(line.provider)
    reflected = line.metadata.get("weight_point") == "1 - s_j"
    while True:
        if t_max > settings.T_MAX_LIMIT:
            raise UsageError(f"tail doubling of {len(line)} terms needs t_max beyond {settings.T_MAX_LIMIT}")
        longer = _build_once(line.a, t_max, theta, datum, line.model, line.sf, line.precision == "extended",
                             reflected, line.tail_terms)
        if len(longer) >= target:
            return longer.truncated(target), t_max
        t_max *= 1.05


def tail_stability(line: SpectralLine, tolerance: Optional[float] = None,
                   datum: Optional[ScatteringDatum] = None) -> TailStabilityReport:
    """Roots from the line's J terms against 2J terms, on every one of the J - 1 common brackets"""
    tolerance = settings.TAIL_STABILITY_TOL if tolerance is None else tolerance
    datum = datum if datum is not None else get_datum()
    base_terms = len(line)
    full, comparison_t_max = _doubled_line(line, datum)
    compared = base_terms - 1
    roots_short = discrete_roots(line)
    roots_full = discrete_roots(full, compared)
    same = len(roots_short) == len(roots_full) == compared
    interior = all(r.bracket[0] < r.tau < r.bracket[1] for r in roots_short + roots_full)
    absolute = np.array([abs(p.tau - q.tau) for p, q in zip(roots_short, roots_full)])
    widths = np.array([r.bracket[1] - r.bracket[0] for r in roots_short])
    relative = absolute / widths if widths.size else absolute
    stable = same and interior and (float(np.max(absolute)) < tolerance if absolute.size else True)
    report = TailStabilityReport(
        base_terms=base_terms, compared=compared, comparison_t_max=comparison_t_max, tolerance=tolerance,
        same_count=same, all_interior=interior, relative_moves=relative, absolute_moves=absolute,
        verdict="stable" if stable else "unstable",
    )
    logger.info(f"Tail doubling {base_terms}->{2 * base_terms} (t_max {comparison_t_max:.2f}): {report.verdict}, "
                f"max move {report.max_absolute_move:.3e}, max relative {report.max_relative_move:.3e}")
    return report
