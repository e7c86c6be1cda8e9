"""
src/comparison.py

Side-by-side comparison of integrators on one initial condition.
"""

from typing import Any, Dict, List, Optional, Sequence

from src.core import KeplerState
from src.diagnostics import conservation_report, trajectory_error
from src.propagator import (
    FixedFictitious,
    FixedPhysical,
    Method,
    Schedule,
    propagate,
)
from src.utils import ParameterError, setup_logger

logger = setup_logger(__name__)


def schedule_for(
    method: Method,
    steps: int,
    h: Optional[float] = None,
    dt: Optional[float] = None,
) -> Schedule:
    """
    Pick a schedule for a method from whichever step sizes were given.

    KS methods prefer the fictitious step h, baselines the physical step
    dt. When only the other one is available: ExactKS runs a physical-time
    schedule, MidpointKS uses dt as its fictitious step, baselines use h as
    their physical step.
    """
    if h is None and dt is None:
        raise ParameterError("a step size is required (--h or --dt)")
    if method is Method.EXACT_KS:
        if h is not None:
            return FixedFictitious(h=h, n_steps=steps)
        return FixedPhysical(dt=dt, n_steps=steps)
    if method is Method.MIDPOINT_KS:
        return FixedFictitious(h=h if h is not None else dt, n_steps=steps)
    return FixedPhysical(dt=dt if dt is not None else h, n_steps=steps)


def compare_methods(
    initial: KeplerState,
    k: float,
    methods: Sequence[Method],
    steps: int,
    h: Optional[float] = None,
    dt: Optional[float] = None,
    with_oracle: bool = False,
) -> List[Dict[str, Any]]:
    """
    Run each method sequentially and collect one table row per method.

    Args:
        initial: Shared initial condition
        k: Gravitational coupling
        methods: At least one method
        steps: Steps per run
        h: Fictitious step for KS methods
        dt: Physical step for baselines
        with_oracle: Add ErrorStats columns from the analytic reference

    Returns:
        Rows with method, steps, final_t, drifts and (optionally) errors
    """
    if not methods:
        raise ParameterError("at least one method is required")

    logger.info(f"Comparing methods: {[m.value for m in methods]}")
    rows = []
    for method in methods:
        schedule = schedule_for(method, steps, h=h, dt=dt)
        traj = propagate(initial, k, method, schedule)
        report = conservation_report(traj, k)
        row: Dict[str, Any] = {
            "method": method.value,
            "steps": len(traj) - 1,
            "final_t": float(traj.samples[-1].t),
            "energy_drift": report.energy_drift,
            "angmom_drift": report.angmom_drift,
            "lrl_drift": report.lrl_drift,
            "constraint_residual_max": report.constraint_residual_max,
        }
        if with_oracle:
            stats = trajectory_error(traj, k)
            row.update({
                "max_abs_position_error": stats.max_abs_position_error,
                "max_abs_momentum_error": stats.max_abs_momentum_error,
                "rms_position_error": stats.rms_position_error,
                "sample_count": stats.sample_count,
            })
        rows.append(row)
        logger.info(f"✅ {method.value}: energy drift {report.energy_drift:.3e}")
    return rows
