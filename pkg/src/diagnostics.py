"""
src/diagnostics.py

Conserved quantities of the Kepler problem, the closed-form two-body
reference solution, and error statistics of trajectories against it.

The reference solution does not use the Stumpff machinery of the
integrator: it solves the elliptic (eccentric anomaly), hyperbolic
(hyperbolic anomaly) or parabolic (Barker cubic) Kepler equation in
difference form with a Newton iteration kept inside a bisection bracket.
The differences 1 - cos, cosh - 1, x - sin x and sinh x - x are evaluated
without cancellation, so orbits with |E| near zero keep full precision.
"""

import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from config.settings import settings, drift_reference_is_relative
from src.core import (
    Elliptic,
    FrequencyClass,
    Hyperbolic,
    KeplerState,
    Trajectory,
    classify_frequency,
    energy,
)
from src.ks_map import bilinear_constraint
from src.utils import (
    Vector,
    EmptyTrajectoryError,
    OracleError,
    as_vec3,
    require_finite,
    require_nonzero_radius,
    require_positive,
    setup_logger,
)

# Setup logger
logger = setup_logger(__name__)

EPS = float(np.finfo(np.float64).eps)


@dataclass(frozen=True)
class ConservationReport:
    """Maximum drifts of the first integrals against the first sample."""
    energy_drift: float
    angmom_drift: float
    lrl_drift: float
    constraint_residual_max: Optional[float]
    series: Optional[Dict[str, np.ndarray]] = None


@dataclass(frozen=True)
class ErrorStats:
    """Position / momentum errors against the analytic reference."""
    max_abs_position_error: float
    max_abs_momentum_error: float
    rms_position_error: float
    sample_count: int


# ==================== FIRST INTEGRALS ====================
def angular_momentum(q: Vector, p: Vector) -> Vector:
    """L = q x p."""
    return np.cross(as_vec3(q, "q"), as_vec3(p, "p"))


def lrl_vector(q: Vector, p: Vector, k: float) -> Vector:
    """
    Laplace-Runge-Lenz vector A = p x (q x p) - k q / |q|.

    |A| = e k for an orbit of eccentricity e.
    """
    q = as_vec3(q, "q")
    p = as_vec3(p, "p")
    k = require_positive(k, "k")
    r = require_nonzero_radius(q)
    return np.cross(p, np.cross(q, p)) - (k / r) * q


def orbital_period(E: float, k: float) -> float:
    """Kepler's third law T = 2 pi k / (-2E)^(3/2) for E < 0, inf otherwise."""
    if E >= 0.0:
        return math.inf
    return 2.0 * math.pi * k / (-2.0 * E) ** 1.5


# ==================== ANALYTIC REFERENCE ====================
_TAIL_TERMS = 12


def _cubic_tail(x: float, y: float) -> float:
    """x^3 * sum_n (-y)^n / (2n + 3)!, Horner form."""
    acc = 1.0
    for n in range(_TAIL_TERMS, 0, -1):
        acc = 1.0 - y * acc / ((2 * n + 2) * (2 * n + 3))
    return x * x * x * acc / 6.0


def _x_minus_sin(x: float) -> float:
    if abs(x) < 1.0:
        return _cubic_tail(x, x * x)
    return x - math.sin(x)


def _sinh_minus_x(x: float) -> float:
    if abs(x) < 1.0:
        return _cubic_tail(x, -x * x)
    return math.sinh(x) - x


def _one_minus_cos(x: float) -> float:
    return 2.0 * math.sin(0.5 * x) ** 2


def _cosh_minus_one(x: float) -> float:
    return 2.0 * math.sinh(0.5 * x) ** 2


def _solve_monotone(
    F: Callable[[float], float],
    dF: Callable[[float], float],
    lo: float,
    hi: float,
    x0: float,
) -> float:
    """Newton iteration on an increasing F, kept inside the bracket [lo, hi]."""
    x = min(max(x0, lo), hi)
    last_step = math.inf
    for _ in range(settings.ORACLE_MAX_ITER):
        f = F(x)
        if f == 0.0:
            return x
        if f < 0.0:
            lo = x
        else:
            hi = x
        x_new = x - f / dF(x)
        if not lo <= x_new <= hi:
            x_new = 0.5 * (lo + hi)
        step = abs(x_new - x)
        # relative, so near-parabolic roots of size 1e-7 still get full precision
        tol = settings.ORACLE_TOL * max(abs(x), abs(x_new))
        if step <= tol or hi - lo <= tol:
            return x_new
        # Newton stopped contracting: F is at its roundoff floor
        if step >= last_step and step <= 64.0 * tol:
            return x_new
        last_step = step
        x = x_new
    raise OracleError(f"oracle failed: Kepler equation did not converge (bracket [{lo}, {hi}])")


def _expand_bracket(F: Callable[[float], float]) -> Tuple[float, float]:
    """Find lo < 0 < hi style bracket for an increasing unbounded F."""
    lo, hi = -1.0, 1.0
    for _ in range(200):
        if F(lo) <= 0.0:
            break
        lo *= 2.0
    for _ in range(200):
        if F(hi) >= 0.0:
            break
        hi *= 2.0
    return lo, hi


def _reference_regime(q0: Vector, p0: Vector, k: float, E: float) -> FrequencyClass:
    """
    Regime of the reference solution.

    Energies within the rounding error of |p|^2/2 - k/|q| are parabolic to
    working precision and go to the Barker branch, as does anything inside
    the configured settings.ZERO_TOL band.
    """
    r0 = float(np.linalg.norm(q0))
    roundoff = EPS * (0.5 * float(np.dot(p0, p0)) + k / r0)
    return classify_frequency(E, max(settings.ZERO_TOL, roundoff))


def _elliptic_fg(q0, p0, k, E, dt):
    """f, g, fdot, gdot through the eccentric-anomaly difference x."""
    r0 = float(np.linalg.norm(q0))
    sqrt_k = math.sqrt(k)
    sigma0 = float(np.dot(q0, p0)) / sqrt_k
    a = -k / (2.0 * E)
    sqrt_a = math.sqrt(a)
    n = sqrt_k / (a * sqrt_a)
    period = 2.0 * math.pi / n
    dt_red = dt - period * math.floor(dt / period + 0.5)
    M = n * dt_red
    beta = r0 / a
    e_sin = sigma0 / sqrt_a

    # x - e cos(E0) sin x + e sin(E0) (1 - cos x) = M with e cos(E0) = 1 - beta
    def F(x: float) -> float:
        return _x_minus_sin(x) + beta * math.sin(x) + e_sin * _one_minus_cos(x) - M

    def dF(x: float) -> float:
        return _one_minus_cos(x) + beta * math.cos(x) + e_sin * math.sin(x)

    x = _solve_monotone(F, dF, M - 2.0, M + 2.0, M / beta)
    sx, omc = math.sin(x), _one_minus_cos(x)
    r = r0 + (a - r0) * omc + sigma0 * sqrt_a * sx
    f = 1.0 - (a / r0) * omc
    g = dt_red - _x_minus_sin(x) / n
    fdot = -math.sqrt(k * a) * sx / (r * r0)
    gdot = 1.0 - (a / r) * omc
    return f, g, fdot, gdot


def _hyperbolic_fg(q0, p0, k, E, dt):
    """f, g, fdot, gdot through the hyperbolic-anomaly difference H."""
    r0 = float(np.linalg.norm(q0))
    sqrt_k = math.sqrt(k)
    sigma0 = float(np.dot(q0, p0)) / sqrt_k
    alpha = k / (2.0 * E)
    sqrt_alpha = math.sqrt(alpha)
    n = sqrt_k / (alpha * sqrt_alpha)
    M = n * dt
    beta = r0 / alpha
    e_sinh = sigma0 / sqrt_alpha

    def F(H: float) -> float:
        return _sinh_minus_x(H) + beta * math.sinh(H) + e_sinh * _cosh_minus_one(H) - M

    def dF(H: float) -> float:
        return _cosh_minus_one(H) + beta * math.cosh(H) + e_sinh * math.sinh(H)

    lo, hi = _expand_bracket(F)
    H = _solve_monotone(F, dF, lo, hi, M / beta)
    sh, cmo = math.sinh(H), _cosh_minus_one(H)
    r = r0 + (alpha + r0) * cmo + sigma0 * sqrt_alpha * sh
    f = 1.0 - (alpha / r0) * cmo
    g = dt - _sinh_minus_x(H) / n
    fdot = -math.sqrt(k * alpha) * sh / (r * r0)
    gdot = 1.0 - (alpha / r) * cmo
    return f, g, fdot, gdot


def _parabolic_fg(q0, p0, k, dt):
    """f, g, fdot, gdot through Barker's cubic in the universal anomaly chi."""
    r0 = float(np.linalg.norm(q0))
    sqrt_k = math.sqrt(k)
    sigma0 = float(np.dot(q0, p0)) / sqrt_k
    target = sqrt_k * dt

    def F(chi: float) -> float:
        return sigma0 * chi * chi / 2.0 + chi ** 3 / 6.0 + r0 * chi - target

    def dF(chi: float) -> float:
        return chi * chi / 2.0 + sigma0 * chi + r0

    lo, hi = _expand_bracket(F)
    chi = _solve_monotone(F, dF, lo, hi, target / r0)
    r = dF(chi)
    f = 1.0 - chi * chi / (2.0 * r0)
    g = dt - chi ** 3 / (6.0 * sqrt_k)
    fdot = -sqrt_k * chi / (r * r0)
    gdot = 1.0 - chi * chi / (2.0 * r)
    return f, g, fdot, gdot


def analytic_reference(initial: KeplerState, k: float, t_query: float) -> Tuple[Vector, Vector]:
    """
    Exact two-body state at physical time t_query.

    Args:
        initial: State at time initial.t
        k: Gravitational coupling
        t_query: Target physical time (earlier or later than initial.t)

    Returns:
        (q, p) at t_query

    Raises:
        OracleError: For rectilinear orbits (|L| = 0), non-convergence or
            a time span beyond floating-point range
    """
    k = require_positive(k, "k")
    t_query = require_finite(t_query, "t_query")
    q0 = initial.q
    p0 = initial.p
    dt = t_query - initial.t
    if dt == 0.0:
        return q0.copy(), p0.copy()

    r0 = float(np.linalg.norm(q0))
    L = np.cross(q0, p0)
    if not float(np.linalg.norm(L)) > 1e-14 * r0 * max(float(np.linalg.norm(p0)), 1e-300):
        logger.error("Analytic reference rejected a rectilinear orbit")
        raise OracleError("oracle failed: degenerate (rectilinear, |L| = 0) orbit")

    E = energy(q0, p0, k)
    regime = _reference_regime(q0, p0, k, E)
    try:
        if isinstance(regime, Elliptic):
            f, g, fdot, gdot = _elliptic_fg(q0, p0, k, E, dt)
        elif isinstance(regime, Hyperbolic):
            f, g, fdot, gdot = _hyperbolic_fg(q0, p0, k, E, dt)
        else:
            f, g, fdot, gdot = _parabolic_fg(q0, p0, k, dt)
    except OverflowError as e:
        logger.error(f"Analytic reference overflowed at dt={dt!r}")
        raise OracleError(f"oracle failed: overflow ({e}) for dt={dt!r}") from e

    q = f * q0 + g * p0
    p = fdot * q0 + gdot * p0
    return q, p


# ==================== REPORTS ====================
def _drift(values: np.ndarray) -> float:
    """Max deviation from the first entry, relative when the reference is not tiny."""
    values = np.atleast_2d(np.asarray(values, dtype=np.float64).T).T
    reference = values[0]
    deviation = float(np.max(np.linalg.norm(values - reference, axis=1)))
    magnitude = float(np.linalg.norm(reference))
    if drift_reference_is_relative(magnitude):
        return deviation / magnitude
    return deviation


def conservation_report(
    traj: Trajectory,
    k: float,
    include_series: bool = False
) -> ConservationReport:
    """
    Drifts of energy, angular momentum and LRL vector over a trajectory.

    Args:
        traj: Non-empty trajectory
        k: Gravitational coupling used to evaluate the integrals
        include_series: Attach per-sample arrays to the report

    Raises:
        EmptyTrajectoryError: If traj has no samples
    """
    if not traj.samples:
        raise EmptyTrajectoryError("conservation report needs at least one sample")

    energies = np.array([energy(s.state.q, s.state.p, k) for s in traj.samples])
    angmom = np.array([angular_momentum(s.state.q, s.state.p) for s in traj.samples])
    lrl = np.array([lrl_vector(s.state.q, s.state.p, k) for s in traj.samples])

    constraint_max = None
    constraints = None
    if all(s.oscillator is not None for s in traj.samples):
        constraints = np.array([
            bilinear_constraint(s.oscillator.Q, s.oscillator.P) for s in traj.samples
        ])
        constraint_max = float(np.max(np.abs(constraints)))

    series = None
    if include_series:
        series = {
            "t": traj.times(),
            "energy": energies,
            "angular_momentum": angmom,
            "lrl": lrl,
        }
        if constraints is not None:
            series["ks_constraint"] = constraints

    return ConservationReport(
        energy_drift=_drift(energies),
        angmom_drift=_drift(angmom),
        lrl_drift=_drift(lrl),
        constraint_residual_max=constraint_max,
        series=series,
    )


def trajectory_error(traj: Trajectory, k: float) -> ErrorStats:
    """
    Compare every sample with the analytic reference at the sample's own time.

    Raises:
        EmptyTrajectoryError: If traj has no samples
        OracleError: If the reference cannot be evaluated
    """
    if not traj.samples:
        raise EmptyTrajectoryError("trajectory error needs at least one sample")

    initial = traj.samples[0].state
    pos_errors = []
    mom_errors = []
    for sample in traj.samples:
        q_ref, p_ref = analytic_reference(initial, k, sample.t)
        pos_errors.append(sample.state.q - q_ref)
        mom_errors.append(sample.state.p - p_ref)

    pos_errors = np.array(pos_errors)
    mom_errors = np.array(mom_errors)
    pos_norms = np.linalg.norm(pos_errors, axis=1)
    return ErrorStats(
        max_abs_position_error=float(np.max(np.abs(pos_errors))),
        max_abs_momentum_error=float(np.max(np.abs(mom_errors))),
        rms_position_error=float(np.sqrt(np.mean(pos_norms ** 2))),
        sample_count=len(traj.samples),
    )
