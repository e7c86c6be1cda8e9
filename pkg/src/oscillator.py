"""
src/oscillator.py

Exact one-step integrator for the isotropic 4D harmonic oscillator

    dQ/ds = P / 4,    dP/ds = 2 E Q,

valid for bound (E < 0), unbound (E > 0) and escape (E = 0) energies.
Provides the trig/hyperbolic kernels, the step parameter delta(h) of the
midpoint form, the explicit rotation-form step, the midpoint-form step and
the discrete energy integral.
"""

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from config.settings import settings
from src.core import Elliptic, classify_frequency
from src.stumpff import stumpff
from src.utils import (
    Vector,
    StepTooLargeError,
    as_vec4,
    require_finite,
    setup_logger,
)

# Setup logger
logger = setup_logger(__name__)


@dataclass(frozen=True)
class TrigKernels:
    """
    Step coefficients for one fictitious-time step h.

    c        = cos(omega h)      | cosh(nu h)    | 1
    s_over_w = sin(omega h)/omega | sinh(nu h)/nu | h
    w2       = omega^2 = -E/2 (negative for unbound orbits)
    """
    c: float
    s_over_w: float
    w2: float


def kernels(E: float, h: float) -> TrigKernels:
    """
    Evaluate the step kernels smoothly across E = 0.

    Args:
        E: Orbit energy (oscillator frequency parameter)
        h: Fictitious-time step

    Returns:
        TrigKernels with c^2 + w2 * s_over_w^2 = 1
    """
    E = require_finite(E, "E")
    h = require_finite(h, "h")
    w2 = -0.5 * E
    c0, c1, _, _ = stumpff(w2 * h * h)
    return TrigKernels(c=c0, s_over_w=h * c1, w2=w2)


def delta(E: float, h: float) -> float:
    """
    Step parameter of the exact midpoint form.

    (2/omega) tan(omega h / 2) for E < 0, (2/nu) tanh(nu h / 2) for E > 0,
    h for E = 0. Computed through the half-angle identity
    delta = s_over_w / ((1 + c) / 2).

    Raises:
        StepTooLargeError: If |omega h| >= pi for a bound orbit
    """
    ker = kernels(E, h)
    regime = classify_frequency(E)
    if isinstance(regime, Elliptic) and regime.z(h) >= math.pi ** 2:
        phase = regime.omega * abs(h)
        logger.error(f"delta: |omega h| = {phase:.6g} reaches the tangent pole")
        raise StepTooLargeError(
            f"step too large: |omega*h| = {phase:.6g} >= pi (E={E}, h={h})"
        )
    half_sum = 0.5 * (1.0 + ker.c)
    if half_sum <= 0.0:
        raise StepTooLargeError(f"step too large: tangent pole reached (E={E}, h={h})")
    return ker.s_over_w / half_sum


def exact_step(Q: Vector, P: Vector, E: float, h: float) -> Tuple[Vector, Vector]:
    """
    Advance (Q, P) by the exact oscillator flow over fictitious time h.

    Q' = c Q + (s_over_w / 4) P
    P' = -4 w2 s_over_w Q + c P

    Defined for every h; no pole restriction applies here.
    """
    Q = as_vec4(Q, "Q")
    P = as_vec4(P, "P")
    ker = kernels(E, h)
    Q_next = ker.c * Q + (0.25 * ker.s_over_w) * P
    P_next = (-4.0 * ker.w2 * ker.s_over_w) * Q + ker.c * P
    return Q_next, P_next


def midpoint_form_step(
    Q: Vector,
    P: Vector,
    E: float,
    step_param: float
) -> Tuple[Vector, Vector]:
    """
    Solve the midpoint-form scheme for one step.

        (Q' - Q) / d = (P' + P) / 8
        (P' - P) / d = E (Q' + Q)

    With d = delta(E, h) this reproduces exact_step(..., h); with d = h it is
    the second-order conservative midpoint rule. The 2x2 system decouples
    component-wise and is solved in closed form.

    Raises:
        StepTooLargeError: If the determinant 1 - E d^2 / 8 vanishes
    """
    Q = as_vec4(Q, "Q")
    P = as_vec4(P, "P")
    E = require_finite(E, "E")
    d = require_finite(step_param, "step_param")

    a = d / 8.0
    b = E * d
    det = 1.0 - a * b
    if abs(det) < settings.MIDPOINT_SINGULAR_TOL:
        logger.error(f"Midpoint solve singular: det={det:.3e} (E={E}, d={d})")
        raise StepTooLargeError(
            f"step too large: midpoint system singular (1 - E*d^2/8 = {det:.3e})"
        )

    diag = (1.0 + a * b) / det
    Q_next = diag * Q + (2.0 * a / det) * P
    P_next = (2.0 * b / det) * Q + diag * P
    return Q_next, P_next


def oscillator_invariant(Q: Vector, P: Vector, E: float) -> float:
    """
    Discrete energy integral |P|^2 / 8 - E |Q|^2.

    Equals k for states lifted from a Kepler orbit of energy E.
    """
    Q = np.asarray(Q, dtype=np.float64)
    P = np.asarray(P, dtype=np.float64)
    return 0.125 * float(np.dot(P, P)) - E * float(np.dot(Q, Q))
