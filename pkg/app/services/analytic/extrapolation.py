"""
Richardson extrapolation of epsilon-sequences
"""
import logging
from typing import Callable, Sequence

import numpy as np

logger = logging.getLogger(__name__)


class ExtrapolationUnstableError(ArithmeticError):
    """Successive Richardson estimates disagree beyond tolerance"""


def richardson(values: Sequence[complex], ratio: float = 2.0, orders: Sequence[int] = None) -> np.ndarray:
    """Richardson tableau for f(eps), f(eps/ratio), f(eps/ratio^2), ...

    ``orders`` lists the error exponents removed column by column (default 1, 2, 3, ...).
    Returns the final row of the tableau; its last entry is the best estimate.
    """
    row = np.asarray(values, dtype=np.complex128)
    if row.size < 1:
        raise ValueError("need at least one value")
    orders = list(orders) if orders is not None else list(range(1, row.size))
    best = [row[-1]]
    for order in orders[:row.size - 1]:
        factor = ratio ** order
        row = (factor * row[1:] - row[:-1]) / (factor - 1.0)
        best.append(row[-1])
    return np.array(best)


def extrapolate_limit(f: Callable[[float], complex], epsilons: Sequence[float],
                      tolerance: float = None) -> complex:
    """Limit of f(eps) as eps -> 0 from a geometric eps-sequence.

    When ``tolerance`` is given the last two tableau estimates must agree within it.
    """
    eps = np.asarray(epsilons, dtype=np.float64)
    ratios = eps[:-1] / eps[1:]
    if eps.size < 2 or not np.allclose(ratios, ratios[0]):
        raise ValueError("epsilons must form a geometric sequence")
    estimates = richardson([f(e) for e in eps], ratio=float(ratios[0]))
    if tolerance is not None and abs(estimates[-1] - estimates[-2]) > tolerance:
        raise ExtrapolationUnstableError(
            f"estimates {estimates[-2]} and {estimates[-1]} differ by more than {tolerance}"
        )
    return complex(estimates[-1])
