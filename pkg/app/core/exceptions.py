"""
Shared exception hierarchy for thetaspec

Service modules define their own errors on top of these roots. The command line
maps InvariantViolationError to exit code 2 and UsageError to exit code 1.
"""


class ThetaspecError(Exception):
    """Base class for all errors raised by thetaspec"""


class UsageError(ThetaspecError):
    """Invalid command, option or configuration supplied by the caller"""


class InvariantViolationError(ThetaspecError):
    """A computed quantity contradicts a proven property of the model"""


class NonFiniteValueError(ThetaspecError, ArithmeticError):
    """A special function produced NaN or infinity"""
