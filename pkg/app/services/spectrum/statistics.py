"""
Unfolding and pair-correlation statistics for sequences of zeros
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import quad

from app.core.exceptions import UsageError
from app.services.scattering import predicted_density, smooth_count

logger = logging.getLogger(__name__)

MIN_POINTS = 30


class InsufficientPointsError(UsageError):
    """Too few abscissas for spacing statistics"""


@dataclass
class PairCorrelation:
    unfolded: np.ndarray
    spacings: np.ndarray  # nearest-neighbour gaps over their mean
    mean: float
    cv: float
    bin_edges: np.ndarray
    density: np.ndarray  # normalised pair counts per unit gap and point

    def rows(self):
        for lo, hi, value in zip(self.bin_edges[:-1], self.bin_edges[1:], self.density):
            yield float(lo), float(hi), float(value)


def unfold(ts: Sequence[float], density: Optional[Callable] = None, counting: Optional[Callable] = None) -> np.ndarray:
    """Map abscissas through a smooth counting function, or through the integral of a density"""
    ts = np.asarray(ts, dtype=np.float64)
    if counting is not None:
        return np.asarray([float(counting(t)) for t in ts])
    if density is None:
        return ts.copy()
    steps = [quad(density, lo, hi)[0] for lo, hi in zip(ts[:-1], ts[1:])]
    return np.concatenate(([0.0], np.cumsum(steps)))


def pair_correlation(ts: Sequence[float], density: Optional[Callable] = None, bin_width: float = 0.1,
                     max_gap: float = 3.0, counting: Optional[Callable] = None) -> PairCorrelation:
    """Histogram of all unfolded pairwise gaps up to max_gap, with nearest-neighbour mean and CV"""
    ts = np.sort(np.asarray(ts, dtype=np.float64))
    if ts.size < MIN_POINTS:
        raise InsufficientPointsError(f"pair correlation needs at least {MIN_POINTS} points, got {ts.size}")
    if bin_width <= 0 or max_gap <= 0:
        raise UsageError("bin_width and max_gap must be positive")

    u = unfold(ts, density, counting)
    nearest = np.diff(u)
    scale = float(np.mean(nearest))
    spacings = nearest / scale
    mean = float(np.mean(spacings))
    cv = float(np.std(spacings) / mean)

    diffs = (u[None, :] - u[:, None]) / scale
    pairs = diffs[np.triu_indices(u.size, k=1)]
    pairs = pairs[pairs <= max_gap]
    n_bins = max(1, int(math.ceil(max_gap / bin_width - 1e-9)))
    edges = np.linspace(0.0, n_bins * bin_width, n_bins + 1)
    counts, _ = np.histogram(pairs, bins=edges)
    logger.info(f"Pair correlation over {u.size} points: nearest-neighbour CV {cv:.4f}")
    return PairCorrelation(
        unfolded=u, spacings=spacings, mean=mean, cv=cv, bin_edges=edges,
        density=counts / (u.size * bin_width),
    )


def line_counting(a: float) -> Callable:
    """Smooth count (T/pi) log(aT/(pi e)) + 1 of the constant-term zeros at height a"""
    return lambda t: float(smooth_count(a, t))


def line_density(a: float) -> Callable:
    return lambda t: predicted_density(a, t)
