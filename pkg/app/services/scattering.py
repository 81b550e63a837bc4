"""
Scattering ratio of the GL(2) model and zeros of the truncated constant term

c(s) = xi(2(1-s)) / xi(2s) with xi(s) = pi^{-s/2} Gamma(s/2) zeta(s). On the critical
line |c| = 1 and c(1/2 + it) = exp(i psi(t)); the continuous phase psi is tracked on a
grid anchored at psi(0+) = pi, which is where c(1/2) = -1 lives.

The constant term a^s + c(s) a^{1-s} vanishes at s = 1/2 + it exactly when the total
phase Z(t) = 2t log a - psi(t) is an odd multiple of pi.
"""
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import List, Optional

import numpy as np
from scipy.optimize import brentq

from app.core.config import settings
from app.core.exceptions import InvariantViolationError, ThetaspecError, UsageError
from app.core.monitoring import monitor_function, record_zeros
from app.services.analytic.extrapolation import extrapolate_limit
from app.services.analytic.lfunction import ZETA, LFunctionSpec, log_gamma_factor

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
HALF_LIMIT_EPSILONS = (1e-2, 5e-3, 2.5e-3, 1.25e-3)


class PhaseStepError(ThetaspecError):
    """Consecutive raw arguments differ by more than pi/2 even after step halving"""


class MonotonicityViolationError(InvariantViolationError):
    """The total phase crossed an odd multiple of pi downwards"""


class ScanRangeError(UsageError):
    """Scan height or truncation parameter out of range"""


@dataclass(frozen=True)
class ConstantTermZero:
    index: int  # j >= 1
    t: float  # zero at s = 1/2 + i t
    branch: int  # Z(t) = (2 branch - 1) pi
    residual: float  # |Z(t) - (2 branch - 1) pi|


@dataclass
class PhaseTable:
    grid: np.ndarray
    psi: np.ndarray
    c_values: np.ndarray
    step: float

    @property
    def t_end(self) -> float:
        return float(self.grid[-1])


class ScatteringDatum:
    """c(s) = Lambda(2(1-s)) / Lambda(2s) together with its tracked phase on the line"""

    def __init__(self, spec: LFunctionSpec = ZETA, t_min: float = None, step: float = None,
                 max_halvings: int = None):
        self.numerator_spec = spec  # evaluated at 2(1-s)
        self.denominator_spec = spec  # evaluated at 2s
        self.t_min = settings.T_MIN if t_min is None else t_min
        self.step = settings.SCAN_STEP if step is None else step
        self.max_halvings = settings.MAX_STEP_HALVINGS if max_halvings is None else max_halvings
        self._table: Optional[PhaseTable] = None
        self._half_value: Optional[complex] = None

    # -- the ratio ---------------------------------------------------------

    def _ratio(self, ss: np.ndarray) -> np.ndarray:
        num, den = 2.0 * (1.0 - ss), 2.0 * ss
        log_gamma = log_gamma_factor(self.numerator_spec, num) - log_gamma_factor(self.denominator_spec, den)
        return np.exp(log_gamma) * self.numerator_spec.L(num) / self.denominator_spec.L(den)

    def value_at_half(self) -> complex:
        """c(1/2) as the limit of c(1/2 + eps); the two completed factors both have poles there"""
        if self._half_value is None:
            self._half_value = extrapolate_limit(
                lambda eps: complex(self._ratio(np.asarray(0.5 + eps, dtype=np.complex128))),
                HALF_LIMIT_EPSILONS,
            )
        return self._half_value

    def c(self, s):
        ss = np.asarray(s, dtype=np.complex128)
        flat = np.atleast_1d(ss)
        at_half = flat == 0.5
        out = np.empty_like(flat)
        if np.any(~at_half):
            out[~at_half] = self._ratio(flat[~at_half])
        if np.any(at_half):
            out[at_half] = self.value_at_half()
        return complex(out[0]) if ss.ndim == 0 else out

    def c_line(self, t):
        return self.c(0.5 + 1j * np.asarray(t, dtype=np.float64))

    # -- phase tracking ----------------------------------------------------

    def _build_table(self, t_end: float) -> PhaseTable:
        step = self.step
        for attempt in range(self.max_halvings + 1):
            n = int(math.ceil((t_end - self.t_min) / step)) + 1
            grid = self.t_min + step * np.arange(n)
            c_values = self.c_line(grid)
            raw = np.angle(c_values)
            jumps = np.angle(c_values[1:] / c_values[:-1])
            if jumps.size == 0 or np.max(np.abs(jumps)) <= math.pi / 2:
                psi = np.unwrap(raw)
                # anchor on the branch continuous with psi(0+) = pi
                psi += TWO_PI * np.round((math.pi - psi[0]) / TWO_PI)
                if attempt:
                    logger.warning(f"Phase grid refined {attempt} time(s) to step {step:g}")
                return PhaseTable(grid=grid, psi=psi, c_values=c_values, step=step)
            step /= 2.0
        raise PhaseStepError(
            f"phase jump above pi/2 persists at step {step * 2:g} on [{self.t_min}, {t_end}]"
        )

    def table(self, t_max: float) -> PhaseTable:
        ceiling = settings.T_MAX_LIMIT + 1.0
        if t_max > ceiling:
            raise ScanRangeError(f"t_max={t_max} exceeds the supported limit {settings.T_MAX_LIMIT}")
        if self._table is None or self._table.t_end < t_max:
            # grow with headroom so nearby requests reuse the table
            self._table = self._build_table(min(ceiling, max(t_max + 1.0, 1.1 * t_max)))
            logger.debug(f"Phase table built to t={self._table.t_end:g} ({self._table.grid.size} nodes)")
        return self._table

    def phase(self, t):
        """Continuous argument psi(t) of c(1/2 + it), t >= t_min"""
        tt = np.asarray(t, dtype=np.float64)
        if np.any(tt <= 0):
            raise ScanRangeError("phase is defined for t > 0 only")
        table = self.table(float(np.max(tt)) + table_margin(self.step))
        k = np.clip(np.rint((tt - self.t_min) / table.step).astype(int), 0, table.grid.size - 1)
        value = table.psi[k] + np.angle(self.c_line(tt) / table.c_values[k])
        return float(value) if tt.ndim == 0 else value

    def phase_derivative(self, t, h: float = None):
        """Centered difference of the tracked phase"""
        h = settings.PHASE_FD_STEP if h is None else h
        tt = np.asarray(t, dtype=np.float64)
        value = (self.phase(tt + h) - self.phase(tt - h)) / (2.0 * h)
        return float(value) if tt.ndim == 0 else value

    def phase_derivative_error(self, t, h: float = None) -> float:
        """Disagreement between the centered difference at h and at h/2"""
        h = settings.PHASE_FD_STEP if h is None else h
        return float(np.max(np.abs(self.phase_derivative(t, h) - self.phase_derivative(t, h / 2.0))))

    # -- total phase -------------------------------------------------------

    def total_phase(self, a: float, t):
        return 2.0 * np.asarray(t, dtype=np.float64) * math.log(a) - self.phase(t)

    def total_phase_derivative(self, a: float, t):
        return 2.0 * math.log(a) - self.phase_derivative(t)


def table_margin(step: float) -> float:
    return 2.0 * step


@lru_cache(maxsize=8)
def get_datum(step: float = None) -> ScatteringDatum:
    """Shared desk-model datum; it does not depend on the truncation height"""
    return ScatteringDatum(step=step)


def _datum(datum: Optional[ScatteringDatum]) -> ScatteringDatum:
    return datum if datum is not None else get_datum()


def _check_height(a: float) -> None:
    if not a > 1:
        raise ScanRangeError(f"truncation height a must exceed 1, got {a}")


def c(s, datum: ScatteringDatum = None):
    return _datum(datum).c(s)


def phase(t, datum: ScatteringDatum = None):
    return _datum(datum).phase(t)


def phase_derivative(t, datum: ScatteringDatum = None):
    return _datum(datum).phase_derivative(t)


def total_phase(a: float, t, datum: ScatteringDatum = None):
    return _datum(datum).total_phase(a, t)


def total_phase_derivative(a: float, t, datum: ScatteringDatum = None):
    return _datum(datum).total_phase_derivative(a, t)


def constant_term(a: float, s, datum: ScatteringDatum = None):
    """a^s + c(s) a^{1-s}"""
    _check_height(a)
    ss = np.asarray(s, dtype=np.complex128)
    log_a = math.log(a)
    value = np.exp(ss * log_a) + _datum(datum).c(ss) * np.exp((1.0 - ss) * log_a)
    return complex(value) if ss.ndim == 0 else value


def _level(z):
    return np.floor((np.asarray(z) + math.pi) / TWO_PI).astype(int)


@monitor_function("scattering.zeros")
def zeros(a: float, t_max: float, datum: ScatteringDatum = None) -> List[ConstantTermZero]:
    """All zeros of the constant term on (t_min, t_max] of the critical line"""
    _check_height(a)
    datum = _datum(datum)
    if t_max > settings.T_MAX_LIMIT:
        raise ScanRangeError(f"t_max={t_max} exceeds the supported limit {settings.T_MAX_LIMIT}")
    if t_max <= datum.t_min:
        raise ScanRangeError(f"t_max={t_max} must exceed t_min={datum.t_min}")
    table = datum.table(t_max)
    inside = table.grid <= t_max
    grid = table.grid[inside]
    psi = table.psi[inside]
    if grid[-1] < t_max:
        grid = np.append(grid, t_max)
        psi = np.append(psi, datum.phase(t_max))
    z_nodes = 2.0 * grid * math.log(a) - psi
    levels = _level(z_nodes)

    def z_minus(target):
        return lambda t: float(datum.total_phase(a, t)) - target

    found: List[ConstantTermZero] = []
    for k in np.flatnonzero(np.diff(levels)):
        lo, hi = levels[k], levels[k + 1]
        if hi < lo:
            logger.error(f"Total phase fell from level {lo} to {hi} on [{grid[k]}, {grid[k + 1]}] (a={a})")
            raise MonotonicityViolationError(
                f"total phase decreased through an odd multiple of pi near t={grid[k]:.6f}"
            )
        for branch in range(lo + 1, hi + 1):
            target = (2 * branch - 1) * math.pi
            t_j = brentq(z_minus(target), grid[k], grid[k + 1], xtol=1e-13, rtol=4 * np.finfo(float).eps)
            residual = abs(float(datum.total_phase(a, t_j)) - target)
            slope = float(datum.total_phase_derivative(a, t_j))
            if slope <= 0:
                logger.error(f"Non-positive phase slope {slope} at zero t={t_j} (a={a})")
                raise MonotonicityViolationError(f"Z'(t) = {slope} <= 0 at the zero t = {t_j}")
            found.append(ConstantTermZero(index=len(found) + 1, t=float(t_j), branch=branch, residual=residual))

    worst = max((z.residual for z in found), default=0.0)
    if worst > settings.BISECTION_TOL:
        logger.warning(f"Largest phase-equation residual {worst:.3e} exceeds {settings.BISECTION_TOL:g}")
    record_zeros(len(found))
    logger.info(f"Found {len(found)} constant-term zeros for a={a} on ({datum.t_min}, {t_max}]")
    return found


def winding_count(a: float, T: float, datum: ScatteringDatum = None) -> int:
    """Odd multiples of pi passed by Z on (t_min, T]"""
    _check_height(a)
    datum = _datum(datum)
    return int(_level(datum.total_phase(a, T)) - _level(datum.total_phase(a, datum.t_min)))


def smooth_count(a: float, T):
    """(T/pi) log(aT/(pi e)) + 1, the smooth main term of the zero count; accepts arrays"""
    T = np.asarray(T, dtype=np.float64)
    return T / math.pi * np.log(a * T / (math.pi * math.e)) + 1.0


def count_predicted(a: float, T: float) -> float:
    """Smooth main term of the zero count, checked against the range where it is meaningful"""
    _check_height(a)
    if T <= TWO_PI:
        raise ScanRangeError(f"count prediction needs T > 2 pi, got {T}")
    return float(smooth_count(a, T))


def predicted_density(a: float, T: float) -> float:
    """Derivative of count_predicted in T"""
    return math.log(a * T / math.pi) / math.pi


def count_deviation(a: float, T: float, datum: ScatteringDatum = None) -> float:
    return abs(len(zeros(a, T, datum)) - count_predicted(a, T))


# lattice thresholds for the normalised gaps; the measured CV is about 0.34 on [50, 100] at a = 3
RIGIDITY_CV = 0.1
MEAN_BAND = (0.95, 1.05)


@dataclass
class SpacingReport:
    raw: np.ndarray
    local: np.ndarray  # gap * Z'(t_j) / 2 pi
    smooth: np.ndarray  # gap in the smooth count, independent of the zeros themselves
    stats: dict = field(default_factory=dict)

    @property
    def rigid(self) -> bool:
        local = self.stats["local"]
        return local["cv"] < RIGIDITY_CV and MEAN_BAND[0] < local["mean"] < MEAN_BAND[1]


def _moments(values: np.ndarray) -> dict:
    mean = float(np.mean(values))
    variance = float(np.var(values))
    return {"mean": mean, "variance": variance, "cv": math.sqrt(variance) / mean if mean else float("nan")}


def gaps(zero_list: List[ConstantTermZero], a: float, datum: ScatteringDatum = None) -> SpacingReport:
    """Consecutive spacings: raw, scaled by the local phase slope, and unfolded by the smooth count"""
    if len(zero_list) < 10:
        raise ScanRangeError(f"gap statistics need at least 10 zeros, got {len(zero_list)}")
    datum = _datum(datum)
    ts = np.array([z.t for z in zero_list])
    raw = np.diff(ts)
    local = raw * datum.total_phase_derivative(a, ts[:-1]) / TWO_PI
    smooth = np.diff(smooth_count(a, ts))
    report = SpacingReport(
        raw=raw,
        local=local,
        smooth=smooth,
        stats={"raw": _moments(raw), "local": _moments(local), "smooth": _moments(smooth)},
    )
    report.stats["rigidity"] = {"cv_threshold": RIGIDITY_CV, "mean_band": list(MEAN_BAND), "rigid": report.rigid}
    if not report.rigid:
        logger.info(f"Normalised gaps are not rigid: CV {report.stats['local']['cv']:.3f}, "
                    f"mean {report.stats['local']['mean']:.3f}")
    return report


def zero_residual(a: float, zero: ConstantTermZero, datum: ScatteringDatum = None) -> float:
    """|constant term| / sqrt(a) evaluated directly at the zero"""
    return abs(constant_term(a, 0.5 + 1j * zero.t, datum)) / math.sqrt(a)


def zeros_in_window(zero_list: List[ConstantTermZero], t_lo: float, t_hi: float) -> List[ConstantTermZero]:
    return [z for z in zero_list if t_lo <= z.t <= t_hi]
