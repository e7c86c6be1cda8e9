"""
src/utils.py

Utility functions for logging, vector validation, and error types.
These are reusable helpers used by other modules.
"""

import logging
import math
from typing import Iterable

import numpy as np
import numpy.typing as npt

from config.settings import settings

# Real vectors of fixed length (3 for physical space, 4 for KS space)
Vector = npt.NDArray[np.float64]


# ==================== LOGGING SETUP ====================
def setup_logger(name: str) -> logging.Logger:
    """
    Create a consistent logger across all modules.

    Args:
        name: Logger name (usually __name__ from calling module)

    Returns:
        Configured logger instance writing to stderr
    """
    logger = logging.getLogger(name)

    # Only configure if not already configured
    if not logger.handlers:
        logger.setLevel(settings.LOG_LEVEL)

        # Console handler with formatting (stderr keeps stdout clean for data)
        handler = logging.StreamHandler()
        formatter = logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        )
        handler.setFormatter(formatter)
        logger.addHandler(handler)

    return logger


# Create module logger
logger = setup_logger(__name__)


# ==================== ERROR HANDLING ====================
class KeplerIntegratorError(Exception):
    """Base class for every error raised by the integrator library."""
    pass


class ParameterError(KeplerIntegratorError, ValueError):
    """Invalid numeric input: non-finite values, wrong shapes, k <= 0."""
    pass


class CollisionStateError(KeplerIntegratorError):
    """Physical state with |q| = 0."""
    pass


class DegenerateFibreError(KeplerIntegratorError):
    """KS state with |Q| = 0 (the whole fibre collapses to the origin)."""
    pass


class StepTooLargeError(KeplerIntegratorError):
    """Step hits the elliptic tangent pole or makes the midpoint solve singular."""
    pass


class RootFindError(KeplerIntegratorError):
    """Physical-time root finding did not converge."""
    pass


class InconsistentInvariantError(KeplerIntegratorError):
    """The supplied k does not match the oscillator energy integral."""
    pass


class OracleError(KeplerIntegratorError):
    """The analytic Kepler reference could not be evaluated."""
    pass


class EmptyTrajectoryError(KeplerIntegratorError):
    """Diagnostics were requested for a trajectory without samples."""
    pass


# ==================== VALIDATION ====================
def as_vector(values: Iterable[float], size: int, name: str = "vector") -> Vector:
    """
    Convert input to a read-only float64 vector of the given length.

    Args:
        values: Any sequence or array of reals
        size: Required length (3 or 4)
        name: Used in error messages

    Returns:
        Immutable numpy array

    Raises:
        ParameterError: On wrong length or non-finite components
    """
    arr = np.array(values, dtype=np.float64).reshape(-1)
    if arr.shape != (size,):
        raise ParameterError(f"{name} must have {size} components, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ParameterError(f"{name} has non-finite components: {arr.tolist()}")
    arr.setflags(write=False)
    return arr


def as_vec3(values: Iterable[float], name: str = "vector") -> Vector:
    """Validate a physical-space vector."""
    return as_vector(values, 3, name)


def as_vec4(values: Iterable[float], name: str = "vector") -> Vector:
    """Validate a KS-space vector."""
    return as_vector(values, 4, name)


def require_finite(value: float, name: str) -> float:
    """Return value as float, rejecting NaN and infinities."""
    value = float(value)
    if not math.isfinite(value):
        raise ParameterError(f"{name} must be finite, got {value}")
    return value


def require_positive(value: float, name: str) -> float:
    """Return value as float, rejecting non-finite and non-positive values."""
    value = require_finite(value, name)
    if value <= 0.0:
        raise ParameterError(f"{name} must be > 0, got {value}")
    return value


def require_nonzero_radius(q: Vector) -> float:
    """
    Return |q|, raising CollisionStateError for the origin.

    The check is strict (no epsilon): near-collision states are handled by
    the regularised representation, not by a cutoff.
    """
    r = float(np.linalg.norm(q))
    if not r > 0.0:
        raise CollisionStateError("collision state: |q| must be > 0")
    return r


def parse_triple(text: str) -> list[float]:
    """
    Parse a comma-separated triple such as ``1,0,0``.

    Raises:
        ValueError: On wrong count or unparsable numbers
    """
    parts = text.split(",")
    if len(parts) != 3:
        raise ValueError(f"expected three comma-separated numbers, got '{text}'")
    return [float(part) for part in parts]
