"""
src/selfcheck.py

Built-in invariant suite run by the `selfcheck` command.
Each check group draws its own random states from a seeded generator and
reports PASS / FAIL with the worst residual it saw.
"""

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from config.settings import settings
from src.core import KeplerState, energy
from src.diagnostics import trajectory_error
from src.ks_map import bilinear_constraint, ks_lift, ks_project
from src.oscillator import delta, exact_step, midpoint_form_step, oscillator_invariant
from src.propagator import FixedFictitious, propagate_exact
from src.time_map import (
    ExtendedState,
    exp_omega,
    omega_matrix,
    time_step,
    time_step_energy_form,
)
from src.utils import KeplerIntegratorError, setup_logger

# Setup logger
logger = setup_logger(__name__)


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one check group."""
    name: str
    passed: bool
    worst: float
    tolerance: float
    detail: str = ""


Check = Callable[[np.random.Generator], CheckResult]


def _random_state(rng: np.random.Generator, k: float = 1.0) -> Tuple[np.ndarray, np.ndarray]:
    """Random physical state with |q| in [0.1, 10] and moderate momentum."""
    direction = rng.normal(size=3)
    q = direction / np.linalg.norm(direction) * rng.uniform(0.1, 10.0)
    p = rng.normal(size=3) * math.sqrt(k / np.linalg.norm(q))
    return q, p


def _result(name: str, worst: float, tolerance: float) -> CheckResult:
    return CheckResult(name=name, passed=bool(worst <= tolerance), worst=worst, tolerance=tolerance)


# ==================== CHECK GROUPS ====================
def check_ks_round_trip(rng: np.random.Generator) -> CheckResult:
    worst = 0.0
    for _ in range(settings.SELFCHECK_SAMPLES):
        q, p = _random_state(rng)
        Q, P = ks_lift(q, p)
        q_back, p_back = ks_project(Q, P)
        worst = max(
            worst,
            float(np.max(np.abs(q_back - q))) / float(np.max(np.abs(q))),
            float(np.max(np.abs(p_back - p))) / max(float(np.max(np.abs(p))), 1e-300),
        )
    return _result("ks_round_trip", worst, 1e-12)


def check_bilinear_constraint(rng: np.random.Generator) -> CheckResult:
    worst = 0.0
    for _ in range(settings.SELFCHECK_SAMPLES):
        q, p = _random_state(rng)
        Q, P = ks_lift(q, p)
        scale = float(np.linalg.norm(Q) * np.linalg.norm(P)) or 1.0
        worst = max(worst, abs(bilinear_constraint(Q, P)) / scale)
    return _result("bilinear_constraint", worst, 1e-13)


def check_omega_identity(rng: np.random.Generator) -> CheckResult:
    worst = 0.0
    for E in rng.uniform(-5.0, 5.0, size=20):
        omega = omega_matrix(E)
        omega2 = omega @ omega
        residual = omega2 @ omega2 - 2.0 * E * omega2
        worst = max(worst, float(np.max(np.abs(residual))) / max(1.0, E * E))
    return _result("omega_identity", worst, 1e-13)


def check_exp_semigroup(rng: np.random.Generator) -> CheckResult:
    worst = 0.0
    for _ in range(20):
        E = rng.uniform(-2.0, 2.0)
        h1, h2 = rng.uniform(0.0, 1.0, size=2)
        lhs = exp_omega(E, h1) @ exp_omega(E, h2)
        rhs = exp_omega(E, h1 + h2)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))) / max(1.0, float(np.max(np.abs(rhs)))))
    return _result("exp_semigroup", worst, 1e-12)


def check_time_map_agreement(rng: np.random.Generator) -> CheckResult:
    worst = 0.0
    for _ in range(100):
        q, p = _random_state(rng)
        k = 1.0
        E = energy(q, p, k)
        Q, P = ks_lift(q, p)
        h = rng.uniform(0.01, 1.0) / max(1.0, math.sqrt(abs(E)))
        via_matrix = float((exp_omega(E, h) @ ExtendedState.from_oscillator(Q, P, 0.0).as_array())[3])
        closed = time_step(Q, P, 0.0, E, h)
        energy_form = time_step_energy_form(Q, P, 0.0, E, oscillator_invariant(Q, P, E), h)
        scale = abs(closed)
        worst = max(
            worst,
            abs(via_matrix - closed) / scale,
            abs(energy_form - closed) / scale,
        )
    return _result("time_map_agreement", worst, 1e-12)


def check_midpoint_exact_equivalence(rng: np.random.Generator) -> CheckResult:
    worst = 0.0
    for E in (-0.5, 0.0, 2.0):
        for h in (0.01, 0.5, 1.0):
            Q = rng.normal(size=4)
            P = rng.normal(size=4)
            Q_exact, P_exact = exact_step(Q, P, E, h)
            Q_mid, P_mid = midpoint_form_step(Q, P, E, delta(E, h))
            scale = max(float(np.max(np.abs(Q_exact))), float(np.max(np.abs(P_exact))))
            worst = max(
                worst,
                float(np.max(np.abs(Q_mid - Q_exact))) / scale,
                float(np.max(np.abs(P_mid - P_exact))) / scale,
            )
    return _result("midpoint_exact_equivalence", worst, 1e-13)


def check_kernel_continuity(rng: np.random.Generator) -> CheckResult:
    worst = abs(delta(1e-8, 1.0) - delta(-1e-8, 1.0))
    return _result("kernel_continuity", worst, 1e-9)


def check_exactness_spot(rng: np.random.Generator) -> CheckResult:
    initial = KeplerState(q=[0.4, 0.0, 0.0], p=[0.0, 2.0, 0.0], t=0.0)
    traj = propagate_exact(initial, 1.0, FixedFictitious(h=0.1, n_steps=100))
    stats = trajectory_error(traj, 1.0)
    worst = max(stats.max_abs_position_error, stats.max_abs_momentum_error)
    return _result("exactness_spot_check", worst, 1e-10)


DEFAULT_CHECKS: Sequence[Check] = (
    check_ks_round_trip,
    check_bilinear_constraint,
    check_omega_identity,
    check_exp_semigroup,
    check_time_map_agreement,
    check_midpoint_exact_equivalence,
    check_kernel_continuity,
    check_exactness_spot,
)


def run_selfcheck(checks: Optional[Sequence[Check]] = None) -> List[CheckResult]:
    """
    Run every check group with one seeded generator.

    Args:
        checks: Groups to run (defaults to DEFAULT_CHECKS)

    Returns:
        One CheckResult per group; a group that raises counts as failed
    """
    rng = np.random.default_rng(settings.SELFCHECK_SEED)
    results = []
    for check in checks if checks is not None else DEFAULT_CHECKS:
        try:
            result = check(rng)
        except KeplerIntegratorError as e:
            logger.error(f"Check {check.__name__} raised: {e}")
            result = CheckResult(
                name=check.__name__.removeprefix("check_"),
                passed=False,
                worst=math.inf,
                tolerance=0.0,
                detail=str(e),
            )
        results.append(result)
    return results
