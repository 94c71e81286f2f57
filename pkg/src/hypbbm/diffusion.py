"""Single-particle dynamics in the upper half-plane.

The log of the vertical coordinate is a Brownian motion with constant
drift, so it is simulated exactly at any set of times. The horizontal
coordinate is conditionally Gaussian given the vertical path; each step
draws it with the endpoint-product quadrature of the accumulated squared
height. The eventual boundary landing point has a closed-form law, so
the infinite tail of the path past a horizon is sampled exactly instead
of being truncated.
"""

import math
from dataclasses import dataclass

import numpy as np

from hypbbm.errors import ConfigError, DomainError

# Fuzz in grid-index space: a time within 1e-9 steps of a grid point is
# treated as lying on it, so j*dt round-trips through division safely.
_IDX_FUZZ = 1e-9


@dataclass(frozen=True)
class DiffusionParams:
    """Dynamics knobs: vertical drift strength and grid step.

    lam > -1/2 keeps the motion transient toward the boundary; lam = 0 is
    the plain hyperbolic Brownian motion.
    """

    lam: float = 0.0
    dt: float = 0.01

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ConfigError(f"dt must be > 0, got {self.dt}")
        if not self.lam > -0.5:
            raise ConfigError(f"lam must be > -0.5, got {self.lam}")

    @property
    def log_drift(self):
        """Drift per unit time of the log vertical coordinate."""
        return -(0.5 + self.lam)


@dataclass(frozen=True)
class PathSegment:
    """A sampled path piece: times with matching coordinates."""

    times: np.ndarray
    x: np.ndarray
    logY: np.ndarray


def first_grid_index(t, dt):
    """Smallest j with j*dt strictly later than t, up to grid fuzz."""
    return int(math.floor(t / dt + _IDX_FUZZ)) + 1


def last_grid_index(t, dt):
    """Largest j with j*dt strictly earlier than t, up to grid fuzz."""
    return int(math.ceil(t / dt - _IDX_FUZZ)) - 1


def segment_times(t_start, t_end, dt):
    """Times at which a segment over (t_start, t_end] is advanced.

    Returns (times, n_interior): the interior grid points followed by
    t_end itself. Grid points are computed as j*dt so that every caller
    sees bit-identical values for the same indices.
    """
    j0 = first_grid_index(t_start, dt)
    j1 = last_grid_index(t_end, dt)
    n_interior = max(j1 - j0 + 1, 0)
    times = np.empty(n_interior + 1)
    times[:n_interior] = np.arange(j0, j0 + n_interior, dtype=float) * dt
    times[-1] = t_end
    return times, n_interior


def envelope_violates(logy, t, lam=0.0):
    """Strict violation of the typicality envelope at absolute time t.

    The envelope requires the log height to track its drift line within
    a +-t^(2/3) corridor.
    """
    return np.abs(logy + (0.5 + lam) * np.asarray(t)) > np.cbrt(t) ** 2


def step(state, dt, params, rng):
    """One time increment from (x, logY): exact vertical, quadrature x."""
    x, logy = state
    g1 = rng.standard_normal()
    g2 = rng.standard_normal()
    logy2 = logy + params.log_drift * dt + math.sqrt(dt) * g1
    x2 = x + math.sqrt(dt * math.exp(logy + logy2)) * g2
    return x2, logy2


def advance_segment(x0, logy0, t_start, times, params, rng):
    """Advance one particle across a run of times, batching the draws.

    Consumes the stream in the same order as repeated `step` calls (one
    vertical and one horizontal normal per time) and computes the same
    updates, accumulated with cumulative sums; results agree with the
    step-by-step loop to rounding.
    """
    m = len(times)
    z = rng.standard_normal((m, 2))
    dts = np.diff(times, prepend=t_start)
    logy = logy0 + np.cumsum(params.log_drift * dts + np.sqrt(dts) * z[:, 0])
    prev = np.empty(m)
    prev[0] = logy0
    prev[1:] = logy[:-1]
    x = x0 + np.cumsum(np.sqrt(dts * np.exp(prev + logy)) * z[:, 1])
    return x, logy


def simulate_path(start, horizon, params, rng):
    """Path on the grid from time 0 to the horizon, start point included."""
    if horizon < 0.0:
        raise ConfigError(f"horizon must be >= 0, got {horizon}")
    x0, logy0 = float(start[0]), float(start[1])
    if horizon == 0.0:
        return PathSegment(np.zeros(1), np.array([x0]), np.array([logy0]))
    times, _ = segment_times(0.0, horizon, params.dt)
    x, logy = advance_segment(x0, logy0, 0.0, times, params, rng)
    return PathSegment(
        np.concatenate(([0.0], times)),
        np.concatenate(([x0], x)),
        np.concatenate(([logy0], logy)),
    )


def sample_exit(x, y, rng, lam=0.0):
    """Boundary point where the motion started at (x, y) finally lands.

    The generator is a time change of a Euclidean Brownian motion, so
    without drift the landing point is exactly Cauchy(x, y). A vertical
    drift lam thickens the vertical decay, turning the law into a
    Student-t with 1 + 2*lam degrees of freedom at the same scale y.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0.0):
        raise DomainError("exit sampling requires y > 0")
    shape = np.broadcast(x, y).shape
    if lam == 0.0:
        c = rng.standard_cauchy(shape if shape else None)
    else:
        df = 1.0 + 2.0 * lam
        c = rng.standard_t(df, shape if shape else None) / math.sqrt(df)
    out = x + y * c
    return float(out) if np.ndim(out) == 0 else out


def exit_cdf(v, x, y, lam=0.0):
    """P(landing point <= v) for the motion started at (x, y); exact."""
    from scipy import stats

    v = np.asarray(v, dtype=float)
    if lam == 0.0:
        out = stats.cauchy.cdf((v - x) / y)
    else:
        df = 1.0 + 2.0 * lam
        out = stats.t.cdf((v - x) * math.sqrt(df) / y, df)
    return float(out) if np.ndim(out) == 0 else out


def advance_states(x, logy, t_start, times, params, rng):
    """Advance a vector of particle states across shared times.

    Same update rule as `step`, applied to all states at once with one
    pair of normal vectors per time. Returns fresh arrays.
    """
    x = np.array(x, dtype=float, copy=True)
    logy = np.array(logy, dtype=float, copy=True)
    t_prev = t_start
    for t in times:
        dt_i = t - t_prev
        z = rng.standard_normal((2, len(x)))
        logy2 = logy + params.log_drift * dt_i + np.sqrt(dt_i) * z[0]
        x += np.sqrt(dt_i * np.exp(logy + logy2)) * z[1]
        logy = logy2
        t_prev = t
    return x, logy


def run_paths(n, horizon, params, rng, start=(0.0, 0.0), envelope_onset=None):
    """Final states of n independent paths on the common grid.

    With envelope_onset set, the third return value flags the paths that
    stayed inside the typicality envelope at every grid time from the
    onset on, horizon endpoint included.
    """
    x = np.full(n, float(start[0]))
    logy = np.full(n, float(start[1]))
    ok = np.ones(n, dtype=bool)
    if horizon > 0.0:
        times, _ = segment_times(0.0, horizon, params.dt)
        t_prev = 0.0
        for t in times:
            dt_i = t - t_prev
            z = rng.standard_normal((2, n))
            logy2 = logy + params.log_drift * dt_i + np.sqrt(dt_i) * z[0]
            x = x + np.sqrt(dt_i * np.exp(logy + logy2)) * z[1]
            logy = logy2
            if envelope_onset is not None and t >= envelope_onset:
                ok &= ~envelope_violates(logy, t, params.lam)
            t_prev = t
    if envelope_onset is None:
        return x, logy
    return x, logy, ok
