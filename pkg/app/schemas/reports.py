"""
JSON report payloads
"""
from typing import Dict, List, Optional

from pydantic import BaseModel, Field


class SpectrumSummary(BaseModel):
    a: float
    t_max: float
    n_zeros: int
    n_roots: int
    matches: int
    cv_line: Optional[float] = None
    cv_theta_zeros: Optional[float] = None
    requested_a: Optional[float] = None
    adjustments: int = 0
    verdict: str = ""
    metadata: Dict[str, str] = Field(default_factory=dict)


class CountReport(BaseModel):
    a: float
    T: float
    found: int
    winding: int
    predicted: float
    deviation: float
    log_bound: float
    complete: bool


class InterlaceReport(BaseModel):
    a: float
    t_max: float
    brackets: int
    roots: int
    all_interior: bool
    all_certificates_positive: bool
    tail_base_terms: int
    tail_compared: int
    tail_comparison_t_max: float
    tail_tolerance: float
    tail_max_absolute_move: float
    tail_median_relative_move: float
    tail_max_relative_move: float
    tail_verdict: str
    verdict: str


class CorrelationReport(BaseModel):
    source: str
    n_points: int
    mean: float
    cv: float
    bin_width: float
    max_gap: float
    histogram: List[List[float]]
