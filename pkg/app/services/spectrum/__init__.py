"""
Discrete-spectrum computations on the truncated constant-term line
"""
from app.services.spectrum.candidates import CandidateReport, eigenvalue_candidates
from app.services.spectrum.secular import (
    DiscreteRoot,
    HeightAdjustmentExhaustedError,
    NoSignChangeError,
    SpectralLine,
    build_line,
    discrete_roots,
    lambda_of,
    tail_stability,
    theta_v,
    theta_v_complex,
)
from app.services.spectrum.statistics import pair_correlation
from app.services.spectrum.theta import DELTA_AT_I, ThetaProvider, get_provider, theta_zeros

__all__ = [
    "CandidateReport", "DELTA_AT_I", "DiscreteRoot", "HeightAdjustmentExhaustedError", "NoSignChangeError",
    "SpectralLine", "ThetaProvider", "build_line", "discrete_roots", "eigenvalue_candidates", "get_provider",
    "lambda_of", "pair_correlation", "tail_stability", "theta_v", "theta_v_complex", "theta_zeros",
]
