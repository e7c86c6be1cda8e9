"""
src/ks_map.py

Kustaanheimo-Stiefel map between the 4D oscillator space and physical space:
projection (Q, P) -> (q, p), a gauge-fixed lift (q, p) -> (Q, P), the
bilinear constraint and the norm identities |q|^2 = |Q|^4,
|P|^2 = 4 |p|^2 |Q|^2.
"""

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from src.utils import (
    Vector,
    DegenerateFibreError,
    as_vec3,
    as_vec4,
    require_nonzero_radius,
    setup_logger,
)

# Setup logger
logger = setup_logger(__name__)


@dataclass(frozen=True)
class KsResiduals:
    """Residuals of the bilinear constraint and of both norm identities."""
    constraint: float
    norm_identity_q: float
    norm_identity_p: float


def ks_matrix(Q: Vector) -> np.ndarray:
    """
    3x4 matrix M(Q) with p = M(Q) P / (2 |Q|^2).

    Rows are orthogonal with squared norm |Q|^2, so M M^T = |Q|^2 I.
    """
    Q1, Q2, Q3, Q4 = Q
    return np.array([
        [Q1, -Q2, -Q3, Q4],
        [Q2, Q1, -Q4, -Q3],
        [Q3, Q4, Q1, Q2],
    ])


def _require_fibre(Q: Vector) -> float:
    """Return |Q|^2, rejecting the degenerate fibre Q = 0."""
    norm2 = float(np.dot(Q, Q))
    if not norm2 > 0.0:
        raise DegenerateFibreError("degenerate fibre: |Q| must be > 0")
    return norm2


def ks_project(Q: Vector, P: Vector) -> Tuple[Vector, Vector]:
    """
    Map a KS state to the physical state.

    The norm identities are guaranteed only when (Q, P) satisfies the
    bilinear constraint; unconstrained input is accepted so diagnostics can
    evaluate perturbed states.

    Raises:
        DegenerateFibreError: If |Q| = 0
    """
    Q = as_vec4(Q, "Q")
    P = as_vec4(P, "P")
    norm2 = _require_fibre(Q)
    Q1, Q2, Q3, Q4 = Q
    q = np.array([
        Q1 * Q1 - Q2 * Q2 - Q3 * Q3 + Q4 * Q4,
        2.0 * (Q1 * Q2 - Q3 * Q4),
        2.0 * (Q1 * Q3 + Q2 * Q4),
    ])
    p = ks_matrix(Q) @ P / (2.0 * norm2)
    return q, p


def ks_lift(q: Vector, p: Vector) -> Tuple[Vector, Vector]:
    """
    Gauge-fixed inverse of ks_project.

    For q1 >= 0 the fibre point with Q4 = 0 is chosen, otherwise the one
    with Q3 = 0; both avoid cancellation when q1 is close to +-|q|.
    Momenta are lifted as P = 2 M(Q)^T p, which satisfies the bilinear
    constraint by construction.

    Raises:
        CollisionStateError: If |q| = 0
    """
    q = as_vec3(q, "q")
    p = as_vec3(p, "p")
    r = require_nonzero_radius(q)
    q1, q2, q3 = q

    if q1 >= 0.0:
        Q1 = math.sqrt(0.5 * (r + q1))
        Q = np.array([Q1, q2 / (2.0 * Q1), q3 / (2.0 * Q1), 0.0])
    else:
        Q2 = math.sqrt(0.5 * (r - q1))
        Q = np.array([q2 / (2.0 * Q2), Q2, 0.0, q3 / (2.0 * Q2)])

    P = 2.0 * ks_matrix(Q).T @ p
    return Q, P


def bilinear_constraint(Q: Vector, P: Vector) -> float:
    """P1 Q4 - P2 Q3 + P3 Q2 - P4 Q1 (zero on physically meaningful states)."""
    Q1, Q2, Q3, Q4 = np.asarray(Q, dtype=np.float64)
    P1, P2, P3, P4 = np.asarray(P, dtype=np.float64)
    return float(P1 * Q4 - P2 * Q3 + P3 * Q2 - P4 * Q1)


def ks_residuals(Q: Vector, P: Vector) -> KsResiduals:
    """
    Evaluate the constraint and both norm identities on a KS state.

    Raises:
        DegenerateFibreError: If |Q| = 0
    """
    q, p = ks_project(Q, P)
    Q = np.asarray(Q, dtype=np.float64)
    P = np.asarray(P, dtype=np.float64)
    Q2 = float(np.dot(Q, Q))
    return KsResiduals(
        constraint=bilinear_constraint(Q, P),
        norm_identity_q=float(np.dot(q, q)) - Q2 * Q2,
        norm_identity_p=float(np.dot(P, P)) - 4.0 * float(np.dot(p, p)) * Q2,
    )


def fibre_rotation(Q: Vector, P: Vector, theta: float) -> Tuple[Vector, Vector]:
    """
    Move a KS state along its fibre by angle theta.

    Rotates the (Q1, Q4) plane by theta and the (Q2, Q3) plane by -theta,
    applying the same rotation to P. The projected (q, p) does not change.
    """
    c, s = math.cos(theta), math.sin(theta)
    R = np.array([
        [c, 0.0, 0.0, -s],
        [0.0, c, s, 0.0],
        [0.0, -s, c, 0.0],
        [s, 0.0, 0.0, c],
    ])
    return R @ as_vec4(Q, "Q"), R @ as_vec4(P, "P")
