"""
thetaspec: spectral computations for truncated Eisenstein series
"""

__version__ = "1.0.0"
