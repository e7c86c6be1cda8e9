"""
src/time_map.py

Physical time along the oscillator flow.

The vector w = (|Q|^2, |P|^2, Q.P, t) obeys the linear system dw/ds = Omega w
with Omega^4 = 2 E Omega^2, so exp(h Omega) collapses to a cubic polynomial
in Omega. The last row gives closed-form time updates, one in terms of
|P|^2 and one with |P|^2 eliminated through the energy integral. A
safeguarded Newton solver inverts the map to hit a physical time step.
"""

import math
from dataclasses import dataclass

import numpy as np

from config.settings import settings
from src.core import Elliptic, classify_frequency
from src.oscillator import exact_step, kernels, oscillator_invariant
from src.stumpff import stumpff
from src.utils import (
    Vector,
    InconsistentInvariantError,
    ParameterError,
    RootFindError,
    StepTooLargeError,
    as_vec4,
    require_finite,
    require_positive,
    setup_logger,
)

# Setup logger
logger = setup_logger(__name__)

# 4x4 real matrix; only used to express the Omega system
Mat4 = np.ndarray


@dataclass(frozen=True)
class ExtendedState:
    """w = (|Q|^2, |P|^2, Q.P, t)."""
    w1: float
    w2: float
    w3: float
    w4: float

    @classmethod
    def from_oscillator(cls, Q: Vector, P: Vector, t: float) -> "ExtendedState":
        Q = np.asarray(Q, dtype=np.float64)
        P = np.asarray(P, dtype=np.float64)
        return cls(
            w1=float(np.dot(Q, Q)),
            w2=float(np.dot(P, P)),
            w3=float(np.dot(Q, P)),
            w4=float(t),
        )

    def as_array(self) -> np.ndarray:
        return np.array([self.w1, self.w2, self.w3, self.w4])


# ==================== OMEGA SYSTEM ====================
def omega_matrix(E: float) -> Mat4:
    """Coefficient matrix of dw/ds = Omega w."""
    E = require_finite(E, "E")
    return np.array([
        [0.0, 0.0, 0.5, 0.0],
        [0.0, 0.0, 4.0 * E, 0.0],
        [2.0 * E, 0.25, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
    ])


def exp_omega(E: float, h: float) -> Mat4:
    """
    exp(h Omega) in closed form.

    Omega^4 = 2 E Omega^2 turns the exponential series into
    I + h Omega + h^2 c2(4z) Omega^2 + h^3 c3(4z) Omega^3 with z = -E h^2 / 2.
    """
    E = require_finite(E, "E")
    h = require_finite(h, "h")
    omega = omega_matrix(E)
    omega2 = omega @ omega
    omega3 = omega2 @ omega
    _, _, c2, c3 = stumpff(-2.0 * E * h * h)
    return np.eye(4) + h * omega + (h * h * c2) * omega2 + (h ** 3 * c3) * omega3


# ==================== TIME UPDATES ====================
def _time_coefficients(E: float, h: float):
    """Shared kernel values: sigma(h), sigma(2h)/(2h) = c1(4z), c3(4z)."""
    w2 = -0.5 * E
    ker = kernels(E, h)
    _, c1_double, _, c3_double = stumpff(4.0 * w2 * h * h)
    return ker.s_over_w, c1_double, c3_double


def time_step(Q: Vector, P: Vector, t: float, E: float, h: float) -> float:
    """
    Physical time after one exact fictitious step h.

    For bound orbits this is

        t + sin(2 omega h)/(4 omega) (|Q|^2 - |P|^2/(16 omega^2))
          + h/2 (|Q|^2 + |P|^2/(16 omega^2))
          + Q.P sin^2(omega h) / (4 omega^2)

    evaluated through Stumpff kernels, which continues it analytically to
    E >= 0.
    """
    Q = as_vec4(Q, "Q")
    P = as_vec4(P, "P")
    t = require_finite(t, "t")
    E = require_finite(E, "E")
    h = require_finite(h, "h")

    sigma, c1_double, c3_double = _time_coefficients(E, h)
    qq = float(np.dot(Q, Q))
    pp = float(np.dot(P, P))
    qp = float(np.dot(Q, P))
    increment = (
        qq * 0.5 * h * (1.0 + c1_double)
        + 0.125 * pp * h ** 3 * c3_double
        + 0.25 * qp * sigma * sigma
    )
    return t + increment


def time_step_energy_form(
    Q: Vector,
    P: Vector,
    t: float,
    E: float,
    k: float,
    h: float
) -> float:
    """
    Physical time after one exact step with |P|^2 eliminated via
    |P|^2 / 8 - E |Q|^2 = k.

    Raises:
        InconsistentInvariantError: If the state's energy integral differs
            from k beyond settings.INVARIANT_REL_TOL
    """
    Q = as_vec4(Q, "Q")
    P = as_vec4(P, "P")
    t = require_finite(t, "t")
    E = require_finite(E, "E")
    k = require_positive(k, "k")
    h = require_finite(h, "h")

    invariant = oscillator_invariant(Q, P, E)
    scale = max(abs(k), 0.125 * float(np.dot(P, P)) + abs(E) * float(np.dot(Q, Q)))
    if abs(invariant - k) > settings.INVARIANT_REL_TOL * scale:
        logger.error(f"Energy integral {invariant!r} inconsistent with k={k!r}")
        raise InconsistentInvariantError(
            f"inconsistent invariant: |P|^2/8 - E|Q|^2 = {invariant:.17g}, expected k = {k:.17g}"
        )

    sigma, c1_double, c3_double = _time_coefficients(E, h)
    qq = float(np.dot(Q, Q))
    qp = float(np.dot(Q, P))
    increment = k * h ** 3 * c3_double + qq * h * c1_double + 0.25 * qp * sigma * sigma
    return t + increment


# ==================== ROOT FINDING ====================
def solve_step_for_time(
    Q: Vector,
    P: Vector,
    t: float,
    E: float,
    dt_target: float
) -> float:
    """
    Fictitious step h whose time update advances t by dt_target.

    Newton iteration on time_step(h) - t - dt_target with the exact
    derivative |Q(s + h)|^2 > 0, safeguarded by a bisection bracket.
    Initial guess dt_target / |Q|^2.

    Raises:
        StepTooLargeError: If a bound orbit cannot reach dt_target within
            |omega h| < pi (the caller has to split the step)
        RootFindError: If the iteration does not converge
    """
    Q = as_vec4(Q, "Q")
    P = as_vec4(P, "P")
    dt_target = require_positive(dt_target, "dt_target")
    E = require_finite(E, "E")
    qq = float(np.dot(Q, Q))
    if not qq > 0.0:
        raise ParameterError("solve_step_for_time needs |Q| > 0")

    def residual(h: float) -> float:
        return time_step(Q, P, 0.0, E, h) - dt_target

    def derivative(h: float) -> float:
        Q_h, _ = exact_step(Q, P, E, h)
        return float(np.dot(Q_h, Q_h))

    # Bracket [lo, hi] with residual(lo) < 0 < residual(hi)
    lo = 0.0
    h_limit = math.inf
    regime = classify_frequency(E)
    if isinstance(regime, Elliptic):
        h_limit = math.pi / regime.omega

    hi = min(dt_target / qq, 0.5 * h_limit)
    while residual(hi) <= 0.0:
        lo = hi
        if hi >= h_limit:
            break
        hi = min(2.0 * hi, h_limit)
        if not math.isfinite(hi):
            raise RootFindError("root find failed: could not bracket the time step")
    if residual(hi) <= 0.0:
        logger.error(f"dt_target={dt_target} not reachable within |omega h| < pi")
        raise StepTooLargeError(
            f"step too large: dt={dt_target} exceeds the time reachable within |omega*h| < pi"
        )

    h = min(max(dt_target / qq, lo), hi)
    if not lo < h < hi:
        h = 0.5 * (lo + hi)

    for iteration in range(settings.ROOT_MAX_ITER):
        f = residual(h)
        if abs(f) <= settings.ROOT_REL_TOL * dt_target:
            logger.debug(f"solve_step_for_time converged in {iteration} iterations: h={h!r}")
            return h
        if f < 0.0:
            lo = h
        else:
            hi = h

        h_new = h - f / derivative(h)
        if not lo < h_new < hi:
            h_new = 0.5 * (lo + hi)
        if h_new == h:
            return h
        h = h_new

    logger.error(f"solve_step_for_time: no convergence after {settings.ROOT_MAX_ITER} iterations")
    raise RootFindError(
        f"root find failed: no convergence in {settings.ROOT_MAX_ITER} iterations (dt={dt_target})"
    )
