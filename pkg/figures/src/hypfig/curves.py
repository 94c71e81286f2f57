"""Closed-form dimension curves drawn as references in the figures.

Both are functions of the branching rate beta at zero drift tilt. The
support curve saturates at beta = 1/2, the closure curve already at
beta = 1/8, and the closure curve dominates pointwise, with equality
exactly on the saturated range.
"""

import numpy as np


def support_curve(beta):
    """min(2*beta, 1), vectorized."""
    beta = np.asarray(beta, dtype=float)
    return np.minimum(2.0 * beta, 1.0)


def closure_curve(beta):
    """(1 - sqrt(1 - 8*beta))/2 below beta = 1/8, then 1, vectorized."""
    beta = np.asarray(beta, dtype=float)
    inner = np.clip(1.0 - 8.0 * beta, 0.0, None)
    return np.where(beta >= 0.125, 1.0, (1.0 - np.sqrt(inner)) / 2.0)
