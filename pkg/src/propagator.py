"""
src/propagator.py

Full-orbit propagation drivers.

- ExactKS: lift to KS space, exact oscillator steps with the exact time
  map, project back. Every node lies on the true Kepler flow.
- MidpointKS: the second-order conservative midpoint rule on the
  oscillator (delta = h) with a midpoint time update.
- RK4 / StormerVerlet: fixed-step baselines on the physical equations.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

import numpy as np

from config.settings import settings
from src.core import (
    KeplerState,
    OscillatorState,
    Params,
    Sample,
    SampleDiagnostics,
    Trajectory,
    energy,
)
from src.diagnostics import angular_momentum, orbital_period
from src.ks_map import bilinear_constraint, ks_lift, ks_project
from src.oscillator import exact_step, midpoint_form_step
from src.time_map import solve_step_for_time, time_step
from src.utils import (
    Vector,
    ParameterError,
    require_positive,
    setup_logger,
)

# Setup logger
logger = setup_logger(__name__)


class Method(str, Enum):
    """Available integrators (values are the CLI names)."""
    EXACT_KS = "exact"
    MIDPOINT_KS = "midpoint"
    RK4 = "rk4"
    STORMER_VERLET = "verlet"

    @property
    def is_ks(self) -> bool:
        return self in (Method.EXACT_KS, Method.MIDPOINT_KS)


@dataclass(frozen=True)
class FixedFictitious:
    """n_steps equal steps h in fictitious time s."""
    h: float
    n_steps: int

    def __post_init__(self):
        require_positive(self.h, "h")
        _require_steps(self.n_steps)


@dataclass(frozen=True)
class FixedPhysical:
    """n_steps equal steps dt in physical time t."""
    dt: float
    n_steps: int

    def __post_init__(self):
        require_positive(self.dt, "dt")
        _require_steps(self.n_steps)


Schedule = Union[FixedFictitious, FixedPhysical]


def _require_steps(n_steps: int) -> None:
    if isinstance(n_steps, bool) or not isinstance(n_steps, (int, np.integer)) or n_steps < 0:
        raise ParameterError(f"n_steps must be an integer >= 0, got {n_steps!r}")


# ==================== SAMPLE HELPERS ====================
def _ks_sample(step: int, s: float, t: float, Q: Vector, P: Vector, k: float) -> Sample:
    """Project a KS node and record both representations."""
    q, p = ks_project(Q, P)
    state = KeplerState(q=q, p=p, t=t)
    return Sample(
        step=step,
        s=s,
        t=t,
        state=state,
        oscillator=OscillatorState(Q=Q, P=P, s=s),
        diagnostics=SampleDiagnostics(
            energy=energy(state.q, state.p, k),
            angular_momentum=angular_momentum(state.q, state.p),
            ks_constraint=bilinear_constraint(Q, P),
        ),
    )


def _physical_sample(step: int, t: float, q: Vector, p: Vector, k: float) -> Sample:
    """Baseline node: the independent variable is physical time, so s = t."""
    state = KeplerState(q=q, p=p, t=t)
    return Sample(
        step=step,
        s=t,
        t=t,
        state=state,
        oscillator=None,
        diagnostics=SampleDiagnostics(
            energy=energy(state.q, state.p, k),
            angular_momentum=angular_momentum(state.q, state.p),
        ),
    )


# ==================== EXACT KS ====================
def propagate_exact(initial: KeplerState, k: float, schedule: Schedule) -> Trajectory:
    """
    Exact conservative propagation through the KS oscillator.

    The oscillator frequency is frozen at E0 = energy(q0, p0, k) for the
    whole run.

    Args:
        initial: Starting physical state (|q0| > 0)
        k: Gravitational coupling
        schedule: FixedFictitious or FixedPhysical

    Returns:
        Trajectory with n_steps + 1 samples
    """
    k = require_positive(k, "k")
    E = energy(initial.q, initial.p, k)
    Q, P = ks_lift(initial.q, initial.p)
    s, t = 0.0, initial.t

    samples = [_ks_sample(0, s, t, Q, P, k)]
    logger.info(f"Exact KS propagation: E={E:.6g}, schedule={schedule}")

    if isinstance(schedule, FixedFictitious):
        h = schedule.h
        for step in range(1, schedule.n_steps + 1):
            t = time_step(Q, P, t, E, h)
            Q, P = exact_step(Q, P, E, h)
            s = step * h
            samples.append(_ks_sample(step, s, t, Q, P, k))
    else:
        sub_steps = _physical_sub_steps(schedule.dt, E, k)
        dt_sub = schedule.dt / sub_steps
        for step in range(1, schedule.n_steps + 1):
            for _ in range(sub_steps):
                h = solve_step_for_time(Q, P, 0.0, E, dt_sub)
                t = time_step(Q, P, t, E, h)
                Q, P = exact_step(Q, P, E, h)
                s += h
            samples.append(_ks_sample(step, s, t, Q, P, k))

    logger.info(f"✅ Exact KS propagation finished: {len(samples)} samples, t={t:.6g}")
    return Trajectory(samples=samples, meta={
        "method": Method.EXACT_KS.value,
        "params": Params(k=k, E=E),
        "schedule": schedule,
    })


def _physical_sub_steps(dt: float, E: float, k: float) -> int:
    """Number of fictitious sub-steps so each stays clear of the elliptic pole."""
    period = orbital_period(E, k)
    if not math.isfinite(period):
        return 1
    sub_steps = max(1, math.ceil(dt / (settings.PHYSICAL_SPLIT_FRACTION * period)))
    if sub_steps > 1:
        logger.warning(f"Physical step dt={dt} split into {sub_steps} sub-steps (period {period:.6g})")
    return sub_steps


# ==================== MIDPOINT KS ====================
def propagate_midpoint_ks(initial: KeplerState, k: float, h: float, n_steps: int) -> Trajectory:
    """
    Second-order conservative midpoint rule on the KS oscillator.

    Conserves |P|^2/8 - E|Q|^2 (hence the Kepler energy) to roundoff but
    not the trajectory. Physical time uses the midpoint rule on
    dt/ds = |Q|^2: t += h |(Q_j + Q_{j+1}) / 2|^2.
    """
    k = require_positive(k, "k")
    h = require_positive(h, "h")
    _require_steps(n_steps)
    E = energy(initial.q, initial.p, k)
    Q, P = ks_lift(initial.q, initial.p)
    t = initial.t

    samples = [_ks_sample(0, 0.0, t, Q, P, k)]
    logger.info(f"Midpoint KS propagation: E={E:.6g}, h={h}, n={n_steps}")

    for step in range(1, n_steps + 1):
        Q_next, P_next = midpoint_form_step(Q, P, E, h)
        Q_mid = 0.5 * (Q + Q_next)
        t += h * float(np.dot(Q_mid, Q_mid))
        Q, P = Q_next, P_next
        samples.append(_ks_sample(step, step * h, t, Q, P, k))

    logger.info(f"✅ Midpoint KS propagation finished: {len(samples)} samples")
    return Trajectory(samples=samples, meta={
        "method": Method.MIDPOINT_KS.value,
        "params": Params(k=k, E=E),
        "schedule": FixedFictitious(h=h, n_steps=n_steps),
    })


# ==================== BASELINES ====================
def _acceleration(q: Vector, k: float) -> Vector:
    r = float(np.linalg.norm(q))
    return -k * q / r ** 3


def _rk4_step(q: Vector, p: Vector, k: float, dt: float):
    k1q, k1p = p, _acceleration(q, k)
    k2q, k2p = p + 0.5 * dt * k1p, _acceleration(q + 0.5 * dt * k1q, k)
    k3q, k3p = p + 0.5 * dt * k2p, _acceleration(q + 0.5 * dt * k2q, k)
    k4q, k4p = p + dt * k3p, _acceleration(q + dt * k3q, k)
    q_next = q + (dt / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
    p_next = p + (dt / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
    return q_next, p_next


def _verlet_step(q: Vector, p: Vector, k: float, dt: float):
    # kick - drift - kick
    p_half = p + 0.5 * dt * _acceleration(q, k)
    q_next = q + dt * p_half
    p_next = p_half + 0.5 * dt * _acceleration(q_next, k)
    return q_next, p_next


def propagate_baseline(
    initial: KeplerState,
    k: float,
    dt: float,
    n_steps: int,
    method: Method
) -> Trajectory:
    """
    Fixed-step RK4 or Stormer-Verlet integration in physical time.

    No conservation guarantee. If |q| drops below settings.COLLISION_RADIUS
    (or the state stops being finite) the run stops and the partial
    trajectory is returned with meta["aborted"] = True.
    """
    k = require_positive(k, "k")
    dt = require_positive(dt, "dt")
    _require_steps(n_steps)
    method = Method(method)
    if method is Method.RK4:
        stepper = _rk4_step
    elif method is Method.STORMER_VERLET:
        stepper = _verlet_step
    else:
        raise ParameterError(f"{method.value} is not a baseline method")

    E = energy(initial.q, initial.p, k)
    q = np.array(initial.q)
    p = np.array(initial.p)
    t0 = initial.t

    samples = [_physical_sample(0, t0, q, p, k)]
    aborted = False
    logger.info(f"Baseline {method.value} propagation: dt={dt}, n={n_steps}")

    for step in range(1, n_steps + 1):
        q, p = stepper(q, p, k, dt)
        r = float(np.linalg.norm(q))
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p))) or r < settings.COLLISION_RADIUS:
            logger.warning(f"Baseline {method.value} aborted at step {step}: collision approach (|q|={r:.3e})")
            aborted = True
            break
        samples.append(_physical_sample(step, t0 + step * dt, q, p, k))

    logger.info(f"✅ Baseline {method.value} finished: {len(samples)} samples")
    return Trajectory(samples=samples, meta={
        "method": method.value,
        "params": Params(k=k, E=E),
        "schedule": FixedPhysical(dt=dt, n_steps=n_steps),
        "aborted": aborted,
    })


# ==================== DISPATCH ====================
def propagate(
    initial: KeplerState,
    k: float,
    method: Method,
    schedule: Schedule,
) -> Trajectory:
    """
    Run any method with a schedule.

    ExactKS accepts both schedule kinds, MidpointKS needs FixedFictitious,
    the baselines need FixedPhysical.
    """
    method = Method(method)
    if method is Method.EXACT_KS:
        return propagate_exact(initial, k, schedule)
    if method is Method.MIDPOINT_KS:
        if not isinstance(schedule, FixedFictitious):
            raise ParameterError("midpoint method needs a fictitious-time step (--h)")
        return propagate_midpoint_ks(initial, k, schedule.h, schedule.n_steps)
    if not isinstance(schedule, FixedPhysical):
        raise ParameterError(f"{method.value} method needs a physical-time step (--dt)")
    return propagate_baseline(initial, k, schedule.dt, schedule.n_steps, method)
