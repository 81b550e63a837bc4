"""
Cross-check of discrete roots against zeros of the theta period
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from app.core.config import settings
from app.services.spectrum.secular import DiscreteRoot, SpectralLine
from app.services.spectrum.theta import DELTA_AT_I, ThetaProvider, theta_zeros

logger = logging.getLogger(__name__)

HISTOGRAM_EDGES = np.arange(-12.0, 2.0 + 1.0, 1.0)  # log10 distance
SPARSE_MATCH_LIMIT = 2


@dataclass
class CandidateReport:
    theta_zeros: np.ndarray
    distances: np.ndarray  # per root, distance to the nearest theta zero
    matches: List[dict] = field(default_factory=list)
    histogram: np.ndarray = None
    histogram_edges: np.ndarray = HISTOGRAM_EDGES
    zero_brackets: List[Optional[int]] = field(default_factory=list)
    tolerance: float = 1e-4

    @property
    def all_zeros_bracketed(self) -> bool:
        return all(b is not None for b in self.zero_brackets)

    @property
    def verdict(self) -> str:
        return "sparsity consistent" if len(self.matches) <= SPARSE_MATCH_LIMIT else "sparsity inconsistent"


def eigenvalue_candidates(line: SpectralLine, roots: List[DiscreteRoot], theta: ThetaProvider = DELTA_AT_I,
                          tol: float = None) -> CandidateReport:
    """Roots of theta v lying within tol of a zero of t -> theta E(1/2 + it)"""
    tol = settings.MATCH_TOL if tol is None else tol
    ts = line.t
    zs = theta_zeros(theta, float(ts[-1]))

    distances = np.full(len(roots), np.inf)
    matches = []
    for k, root in enumerate(roots):
        if zs.size:
            nearest = int(np.argmin(np.abs(zs - root.tau)))
            distances[k] = abs(zs[nearest] - root.tau)
            if distances[k] < tol:
                matches.append({"j": root.index, "tau": root.tau, "theta_zero": float(zs[nearest]),
                                "distance": float(distances[k])})

    # bracket index j with t_j < zero < t_{j+1}, None if the zero sits outside (t_1, t_J)
    brackets: List[Optional[int]] = []
    for zero in zs:
        j = int(np.searchsorted(ts, zero))
        brackets.append(j if 0 < j < ts.size and ts[j - 1] < zero < ts[j] else None)

    finite = distances[np.isfinite(distances) & (distances > 0)]
    histogram, _ = np.histogram(np.clip(np.log10(finite), HISTOGRAM_EDGES[0], HISTOGRAM_EDGES[-1] - 1e-9),
                                bins=HISTOGRAM_EDGES)
    report = CandidateReport(theta_zeros=zs, distances=distances, matches=matches, histogram=histogram,
                             zero_brackets=brackets, tolerance=tol)
    logger.info(f"{len(zs)} theta zeros, {len(matches)} matches within {tol:g}: {report.verdict}")
    return report
