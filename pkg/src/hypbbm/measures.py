"""Atomic boundary measures built from population snapshots.

Each live particle contributes one atom: an exact sample of where its
motion would eventually land on the boundary, expressed as a disk angle.
Filtering to the typical particles gives the sub-probability variant.
Weights come in two modes: by-count divides by the population size,
by-mean multiplies each atom by the reciprocal of the expected
population, which keeps second-moment identities clean.
"""

import math
from dataclasses import dataclass

import numpy as np

from hypbbm import rng as rng_mod
from hypbbm.diffusion import sample_exit
from hypbbm.engine import typical_mask
from hypbbm.geometry import boundary_to_angle

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Arc:
    """Closed arc from lo to hi, counterclockwise; wraps when lo > hi."""

    lo: float
    hi: float


@dataclass(frozen=True)
class LineInterval:
    """Closed interval [a, b] of the half-plane boundary line.

    Endpoints may be infinite; the atom at the boundary point at infinity
    (disk angle 0) never counts, matching intervals of the real line.
    An empty interval (a > b) has mass zero.
    """

    a: float
    b: float


class BoundaryMeasure:
    """Weighted atoms on the boundary circle, sorted by angle."""

    def __init__(self, angles, weights, typical, normalization, total):
        self.angles = np.asarray(angles, dtype=float)
        self.weights = np.asarray(weights, dtype=float)
        self.typical = np.asarray(typical, dtype=bool)
        self.normalization = normalization
        self.total = float(total)
        self._cum = np.concatenate(([0.0], np.cumsum(self.weights)))

    def __len__(self):
        return len(self.angles)

    def _mass_upto(self, angle, side):
        return self._cum[np.searchsorted(self.angles, angle, side=side)]

    def arc_mass(self, lo, hi):
        if lo <= hi:
            return float(self._mass_upto(hi, "right") - self._mass_upto(lo, "left"))
        return float(
            self.total
            - (self._mass_upto(lo, "left") - self._mass_upto(hi, "right"))
        )

    def infinity_mass(self):
        """Weight sitting exactly on the angle of the point at infinity."""
        return float(self._mass_upto(0.0, "right"))


def interval_mass(measure, interval):
    """Mass of a circle arc or of a boundary-line interval."""
    if isinstance(interval, Arc):
        return measure.arc_mass(interval.lo, interval.hi)
    if isinstance(interval, LineInterval):
        a, b = interval.a, interval.b
        if a > b:
            return 0.0
        lo = 0.0 if a == -math.inf else boundary_to_angle(a)
        hi = _TWO_PI if b == math.inf else boundary_to_angle(b)
        mass = float(
            measure._mass_upto(hi, "right") - measure._mass_upto(lo, "left")
        )
        if lo == 0.0:
            mass -= measure.infinity_mass()
        return mass
    raise TypeError(f"unsupported interval type: {type(interval).__name__}")


class CdfView:
    """Right-continuous cumulative mass over angles, queried by bisection."""

    def __init__(self, angles, cum, total, atom_count):
        self._angles = angles
        self._cz = np.concatenate(([0.0], cum))
        self.total = total
        self.atom_count = atom_count

    def __call__(self, angle):
        out = self._cz[np.searchsorted(self._angles, angle, side="right")]
        return float(out) if np.ndim(out) == 0 else out


def cdf(measure):
    return CdfView(
        measure.angles,
        np.cumsum(measure.weights),
        measure.total,
        len(measure),
    )


def _atom_weight(snapshot):
    if snapshot.config.normalization == "by-count":
        return 1.0 / snapshot.population
    return math.exp(-snapshot.config.beta * snapshot.duration)


def _exit_angles(snapshot, rng):
    """One exit sample per live particle, in id order.

    Heights that underflowed to zero are lifted to the smallest positive
    float; their exit is then their current horizontal coordinate.
    """
    if rng is None:
        rng = rng_mod.stream(snapshot.config.seed, rng_mod.EXIT_TAG)
    y = np.maximum(np.exp(snapshot.logY), np.finfo(float).tiny)
    exits = sample_exit(snapshot.x, y, rng, snapshot.config.lam)
    return boundary_to_angle(exits)


def _build(snapshot, angles, keep, total):
    order = np.argsort(angles[keep], kind="stable")
    return BoundaryMeasure(
        angles[keep][order],
        np.full(int(np.count_nonzero(keep)), _atom_weight(snapshot)),
        snapshot.typical_ok[keep][order],
        snapshot.config.normalization,
        total,
    )


def project_to_boundary(snapshot, rng=None):
    """Boundary projection of the whole population, one atom per particle."""
    angles = _exit_angles(snapshot, rng)
    n = snapshot.population
    if snapshot.config.normalization == "by-count":
        total = 1.0
    else:
        total = n * _atom_weight(snapshot)
    return _build(snapshot, angles, np.ones(n, dtype=bool), total)


def typical_measure(snapshot, onset=None, rng=None):
    """Projection restricted to typical particles under the given onset.

    The per-atom weight keeps the full-population denominator, so the
    result is a sub-measure of the full projection. With the default rng
    the exit samples coincide with project_to_boundary's atom by atom,
    and across onsets the measures are monotone by construction.
    """
    if onset is None:
        onset = snapshot.config.onset
    keep = typical_mask(snapshot, onset)
    angles = _exit_angles(snapshot, rng)
    count = int(np.count_nonzero(keep))
    if snapshot.config.normalization == "by-count":
        total = count / snapshot.population
    else:
        total = count * _atom_weight(snapshot)
    measure = _build(snapshot, angles, keep, total)
    # Atoms of the typical measure are typical by definition of the cut.
    return BoundaryMeasure(
        measure.angles,
        measure.weights,
        np.ones(len(measure), dtype=bool),
        measure.normalization,
        measure.total,
    )


def write_measure_csv(measure, path):
    with open(path, "w") as fh:
        fh.write("angle,weight,typical\n")
        for i in range(len(measure)):
            fh.write(
                f"{float(measure.angles[i])!r},{float(measure.weights[i])!r},"
                f"{1 if measure.typical[i] else 0}\n"
            )


def write_cdf_csv(measure, path):
    cum = np.cumsum(measure.weights)
    with open(path, "w") as fh:
        fh.write("angle,F\n")
        for i in range(len(measure)):
            fh.write(f"{float(measure.angles[i])!r},{float(cum[i])!r}\n")
