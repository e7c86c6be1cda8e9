"""Random state generators shared by the test modules."""

import math

import numpy as np


def random_physical_state(rng, r_min=0.1, r_max=10.0):
    """Random (q, p) with |q| in [r_min, r_max] and momentum on the orbital scale."""
    direction = rng.normal(size=3)
    q = direction / np.linalg.norm(direction) * rng.uniform(r_min, r_max)
    p = rng.normal(size=3) * math.sqrt(1.0 / np.linalg.norm(q))
    return q, p


def random_rotation(rng):
    """Random proper orthogonal 3x3 matrix."""
    A, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    if np.linalg.det(A) < 0:
        A[:, 0] = -A[:, 0]
    return A
