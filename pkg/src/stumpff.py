"""
src/stumpff.py

Stumpff functions c_k(y) = sum_n (-y)^n / (2n + k)!  for k = 0..3.

For y > 0 they are cos/sin combinations of sqrt(y), for y < 0 the matching
cosh/sinh combinations, and at y = 0 they reduce to 1/k!. One evaluation
path serves the elliptic, hyperbolic and parabolic regimes: a truncated
series near zero, closed forms elsewhere.
"""

import math
from typing import Tuple

from config.settings import settings
from src.utils import StepTooLargeError


def _series(y: float, k: int) -> float:
    """Horner evaluation of sum_n (-y)^n / (2n + k)!."""
    terms = settings.STUMPFF_SERIES_TERMS
    # innermost term first: a_n / a_{n-1} = -y / ((2n + k - 1)(2n + k))
    acc = 1.0
    for n in range(terms, 0, -1):
        acc = 1.0 - y * acc / ((2 * n + k - 1) * (2 * n + k))
    return acc / math.factorial(k)


def stumpff(y: float) -> Tuple[float, float, float, float]:
    """
    Evaluate c0, c1, c2, c3 at y.

    Args:
        y: Kernel argument (omega^2 h^2 in the oscillator, positive when bound)

    Returns:
        Tuple (c0, c1, c2, c3)

    Raises:
        StepTooLargeError: If the hyperbolic closed forms overflow
    """
    if not math.isfinite(y):
        raise StepTooLargeError(f"step too large: kernel argument {y!r} is not finite")
    if abs(y) < settings.STUMPFF_SERIES_THRESHOLD:
        return _series(y, 0), _series(y, 1), _series(y, 2), _series(y, 3)

    if y > 0.0:
        x = math.sqrt(y)
        c0 = math.cos(x)
        c1 = math.sin(x) / x
    else:
        x = math.sqrt(-y)
        try:
            c0 = math.cosh(x)
            c1 = math.sinh(x) / x
        except OverflowError as e:
            raise StepTooLargeError(
                f"step too large: hyperbolic kernel overflows at sqrt(-y) = {x:.6g}"
            ) from e
    # c2 = (1 - c0) / y and c3 = (1 - c1) / y hold in both regimes
    c2 = (1.0 - c0) / y
    c3 = (1.0 - c1) / y
    return c0, c1, c2, c3
