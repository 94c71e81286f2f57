"""Conformal maps between the unit-disk and upper-half-plane models.

The half-plane carries the simulation (its vertical coordinate separates
cleanly in the dynamics); the disk carries the pictures. The boundary
circle is parametrized by an angle in [0, 2pi), with the point at
infinity of the half-plane boundary sitting at angle 0.

All maps accept scalars or numpy arrays and broadcast.
"""

import numpy as np

from hypbbm.errors import DomainError

_TWO_PI = 2.0 * np.pi
# Points this close to the rim of the disk have no finite image.
_RIM_TOL = 1e-12


def disk_to_half(x, y):
    """Map a point of the open unit disk to the open upper half-plane.

    Raises DomainError if any point lies on or outside the unit circle
    (within a small tolerance of the rim counts as outside).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r2 = x * x + y * y
    if np.any(r2 >= (1.0 - _RIM_TOL) ** 2):
        raise DomainError("point not strictly inside the unit disk")
    d = (1.0 - x) ** 2 + y * y
    hx = -2.0 * y / d
    hy = (1.0 - r2) / d
    if hx.ndim == 0:
        return float(hx), float(hy)
    return hx, hy


def half_to_disk(hx, hy):
    """Map a point of the open upper half-plane to the open unit disk."""
    hx = np.asarray(hx, dtype=float)
    hy = np.asarray(hy, dtype=float)
    if np.any(hy <= 0.0):
        raise DomainError("point not strictly inside the upper half-plane")
    e = hx * hx + (hy + 1.0) ** 2
    x = (hx * hx + hy * hy - 1.0) / e
    y = -2.0 * hx / e
    if x.ndim == 0:
        return float(x), float(y)
    return x, y


def boundary_to_angle(x):
    """Angle on the boundary circle of the point below a half-plane abscissa.

    The map is increasing: -inf and +inf both land at angle 0, the origin
    lands at pi, and x = -1, 1 land at pi/2, 3pi/2.
    """
    x = np.asarray(x, dtype=float)
    finite = np.isfinite(x)
    # atan2 at (+-inf, +-inf) returns a spurious diagonal angle, so pin
    # the infinite abscissas to angle 0 before the call.
    xf = np.where(finite, x, 0.0)
    theta = np.arctan2(-2.0 * xf, xf * xf - 1.0)
    theta = np.mod(theta, _TWO_PI)
    # mod can round up to exactly 2pi for angles a hair below it.
    theta = np.where(theta >= _TWO_PI, theta - _TWO_PI, theta)
    theta = np.where(finite, theta, 0.0)
    if theta.ndim == 0:
        return float(theta)
    return theta


def angle_to_boundary(theta):
    """Half-plane abscissa under a boundary angle; inf at angle 0."""
    theta = np.asarray(theta, dtype=float)
    t = np.mod(theta, _TWO_PI)
    at_zero = (t == 0.0)
    with np.errstate(divide="ignore"):
        x = np.where(at_zero, np.inf, -1.0 / np.tan(np.where(at_zero, 1.0, t) / 2.0))
    if x.ndim == 0:
        return float(x)
    return x
