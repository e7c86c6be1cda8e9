"""
src/core.py

Domain types shared by every module: physical and KS states, orbit
parameters, trajectories, plus energy evaluation and the frequency
classification that picks the elliptic / hyperbolic / parabolic branch.

All types are frozen dataclasses holding read-only numpy vectors, so they
can be shared between threads freely.
"""

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Mapping, Optional, Tuple, Union

import numpy as np

from config.settings import settings
from src.utils import (
    Vector,
    DegenerateFibreError,
    ParameterError,
    as_vec3,
    as_vec4,
    require_finite,
    require_nonzero_radius,
    require_positive,
)


# ==================== STATES ====================
@dataclass(frozen=True, eq=False)
class KeplerState:
    """Physical state: position q, momentum per unit mass p, time t."""
    q: Vector
    p: Vector
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "q", as_vec3(self.q, "q"))
        object.__setattr__(self, "p", as_vec3(self.p, "p"))
        object.__setattr__(self, "t", require_finite(self.t, "t"))
        require_nonzero_radius(self.q)


@dataclass(frozen=True, eq=False)
class OscillatorState:
    """
    Regularised state: KS coordinates Q, conjugate momenta P, fictitious time s.

    The bilinear constraint is not enforced here; states built by ks_lift
    satisfy it, perturbed states used in diagnostics may not.
    """
    Q: Vector
    P: Vector
    s: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "Q", as_vec4(self.Q, "Q"))
        object.__setattr__(self, "P", as_vec4(self.P, "P"))
        object.__setattr__(self, "s", require_finite(self.s, "s"))
        if not np.linalg.norm(self.Q) > 0.0:
            raise DegenerateFibreError("degenerate fibre: |Q| must be > 0")


@dataclass(frozen=True)
class Params:
    """Gravitational coupling k and orbit energy E."""
    k: float
    E: float

    def __post_init__(self):
        object.__setattr__(self, "k", require_positive(self.k, "k"))
        object.__setattr__(self, "E", require_finite(self.E, "E"))


# ==================== FREQUENCY CLASSES ====================
@dataclass(frozen=True)
class Elliptic:
    """Bound orbit, E < 0, real frequency omega with omega^2 = -E/2."""
    omega: float

    def z(self, h: float) -> float:
        """Kernel argument -E h^2 / 2."""
        return self.omega * self.omega * h * h


@dataclass(frozen=True)
class Hyperbolic:
    """Unbound orbit, E > 0, imaginary frequency i*nu with nu^2 = E/2."""
    nu: float

    def z(self, h: float) -> float:
        return -self.nu * self.nu * h * h


@dataclass(frozen=True)
class Parabolic:
    """Escape orbit, E = 0, vanishing frequency."""

    def z(self, h: float) -> float:
        return 0.0


FrequencyClass = Union[Elliptic, Hyperbolic, Parabolic]


# ==================== TRAJECTORIES ====================
@dataclass(frozen=True, eq=False)
class SampleDiagnostics:
    """Per-sample record: energy, angular momentum, KS constraint (KS methods only)."""
    energy: float
    angular_momentum: Vector
    ks_constraint: Optional[float] = None


@dataclass(frozen=True, eq=False)
class Sample:
    """One trajectory node."""
    step: int
    s: float
    t: float
    state: KeplerState
    oscillator: Optional[OscillatorState]
    diagnostics: SampleDiagnostics


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    Ordered samples of one propagation run plus its metadata.

    meta holds at least ``method``, ``params`` (Params) and the step
    description; baseline runs that stopped early carry ``aborted=True``.
    Samples are stored as a tuple and meta as a read-only mapping.
    """
    samples: Tuple[Sample, ...] = ()
    meta: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        object.__setattr__(self, "meta", MappingProxyType(dict(self.meta)))

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def params(self) -> Params:
        return self.meta["params"]

    @property
    def initial(self) -> KeplerState:
        return self.samples[0].state

    @property
    def final(self) -> KeplerState:
        return self.samples[-1].state

    def times(self) -> np.ndarray:
        """Physical times of all samples."""
        return np.array([sample.t for sample in self.samples])


# ==================== OPERATIONS ====================
def energy(q: Vector, p: Vector, k: float) -> float:
    """
    Kepler energy E = |p|^2/2 - k/|q|.

    Args:
        q: Position
        p: Momentum per unit mass
        k: Gravitational coupling (> 0)

    Returns:
        Orbit energy

    Raises:
        CollisionStateError: If |q| = 0

    Example:
        >>> energy([1, 0, 0], [0, 1, 0], 1.0)
        -0.5
    """
    q = as_vec3(q, "q")
    p = as_vec3(p, "p")
    k = require_positive(k, "k")
    r = require_nonzero_radius(q)
    return 0.5 * float(np.dot(p, p)) - k / r


def classify_frequency(E: float, zero_tol: Optional[float] = None) -> FrequencyClass:
    """
    Pick the oscillator regime from the orbit energy.

    Args:
        E: Orbit energy
        zero_tol: Half-width of the parabolic band (defaults to settings.ZERO_TOL)

    Returns:
        Elliptic(omega) for E < -zero_tol, Hyperbolic(nu) for E > zero_tol,
        Parabolic() otherwise
    """
    E = require_finite(E, "E")
    if zero_tol is None:
        zero_tol = settings.ZERO_TOL
    if zero_tol < 0.0:
        raise ParameterError(f"zero_tol must be >= 0, got {zero_tol}")

    if E < -zero_tol:
        return Elliptic(omega=math.sqrt(-0.5 * E))
    if E > zero_tol:
        return Hyperbolic(nu=math.sqrt(0.5 * E))
    return Parabolic()
