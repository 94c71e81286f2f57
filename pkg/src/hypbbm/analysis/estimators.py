"""Scaling-exponent estimators: box counting, pair correlations,
modulus of continuity, and interval-moment decay.

All fits are least-squares lines in log-log coordinates. Scales outside
the trustworthy window (finer than the atom resolution, coarser than an
eighth of the circle) are excluded before fitting. A flat curve is
reported as exponent zero rather than an error; errors are reserved for
inputs carrying no signal at all.
"""

import math

import numpy as np
from scipy import stats

from hypbbm import rng as rng_mod
from hypbbm.engine import run
from hypbbm.errors import ConfigError, DegenerateInputError, InsufficientDataError
from hypbbm.measures import LineInterval, interval_mass, project_to_boundary, typical_measure
from hypbbm.parallel import map_indexed
from hypbbm.analysis.reports import EstimateReport

_TWO_PI = 2.0 * math.pi
# Fits exclude scales finer than this many atom spacings.
_RESOLUTION_FACTOR = 10.0
# ... and coarser than this fraction of the domain.
_COARSE_FRACTION = 1.0 / 8.0


def support_dimension(beta, lam=0.0):
    """Dimension of the support of the limiting boundary measure."""
    return min(2.0 * beta / (1.0 + 2.0 * lam), 1.0)


def limit_set_dimension(beta, lam=0.0):
    """Dimension of the closure of all boundary accumulation points."""
    a = 1.0 + 2.0 * lam
    if beta >= a * a / 8.0:
        return 1.0
    return (a - math.sqrt(a * a - 8.0 * beta)) / 2.0


def _check_scales(scales, atom_count, span_decades):
    scales = np.asarray(sorted(float(s) for s in scales))
    if len(scales) < 4:
        raise InsufficientDataError(f"need at least 4 scales, got {len(scales)}")
    if np.any(scales <= 0.0):
        raise InsufficientDataError("scales must be positive")
    span = scales[-1] / scales[0]
    if span < 10.0**span_decades * (1.0 - 1e-9):
        raise InsufficientDataError(
            f"scales span {math.log10(span):.2f} decades, need {span_decades}"
        )
    if atom_count and np.any(scales < 1.0 / atom_count):
        raise InsufficientDataError("scales finer than the empirical resolution")
    return scales


def _usable(scales, atom_count, domain_width=_TWO_PI):
    mask = scales <= domain_width * _COARSE_FRACTION
    if atom_count:
        mask &= scales >= _RESOLUTION_FACTOR / atom_count
    usable = scales[mask]
    if len(usable) < 4:
        raise InsufficientDataError(
            f"only {len(usable)} scales inside the trustworthy window"
        )
    return usable


def _fit_loglog(xs, ys, flip_x=False):
    """Slope of log ys against log xs (or log 1/xs); flat curves give 0."""
    ys = np.asarray(ys, dtype=float)
    if np.all(ys == ys[0]):
        return 0.0, 0.0
    lx = -np.log(xs) if flip_x else np.log(xs)
    fit = stats.linregress(lx, np.log(ys))
    return float(fit.slope), float(fit.stderr)


def _box_counts(measure, deltas, mode, mass_floor):
    """Snapped arc widths and occupied-arc counts, with no trust filtering."""
    eff_scales = []
    counts = []
    for delta in deltas:
        n_arcs = int(math.ceil(_TWO_PI / delta - 1e-12))
        eff = _TWO_PI / n_arcs
        idx = np.minimum((measure.angles / eff).astype(np.int64), n_arcs - 1)
        if mode == "all-points":
            occupied = len(np.unique(idx))
        else:
            mass = np.bincount(idx, weights=measure.weights, minlength=n_arcs)
            occupied = int(np.count_nonzero(mass > mass_floor * measure.total))
        eff_scales.append(eff)
        counts.append(occupied)
    return np.asarray(eff_scales), np.asarray(counts, dtype=float)


def box_dimension(measure, scales, mode="support", mass_floor=0.0):
    """Box-counting slope of a boundary measure.

    support mode counts arcs carrying more than mass_floor of the total
    mass; all-points mode counts arcs holding at least one atom.
    """
    if mode not in ("support", "all-points"):
        raise ConfigError(f"mode must be support or all-points, got {mode!r}")
    if not 0.0 <= mass_floor < 1.0:
        raise ConfigError(f"mass_floor must be in [0, 1), got {mass_floor}")
    n = len(measure)
    if n == 0:
        raise DegenerateInputError("measure has no atoms")
    scales = _check_scales(scales, n, span_decades=1.5)
    usable = _usable(scales, n)
    eff_scales, counts = _box_counts(measure, usable, mode, mass_floor)

    constant = np.all(counts == counts[0])
    if counts[-1] < 2 and not (constant and counts[-1] >= 1):
        raise DegenerateInputError(
            "fewer than 2 occupied boxes at the coarsest usable scale"
        )
    keep = counts > 0
    if np.count_nonzero(keep) < 4 and not constant:
        raise InsufficientDataError("too many empty box counts to fit")
    slope, stderr = _fit_loglog(eff_scales[keep], counts[keep], flip_x=True)
    return EstimateReport(
        name=f"box-dimension-{mode}",
        estimate=slope,
        stderr=stderr,
        scales=(float(eff_scales[0]), float(eff_scales[-1])),
        points_per_scale=n,
        curve=list(zip(eff_scales.tolist(), counts.tolist())),
        params={"mode": mode, "mass_floor": mass_floor},
    )


def correlation_dimension(measure, scales):
    """Slope of the weighted pair-correlation sum against the scale."""
    n = len(measure)
    if n < 1000:
        raise InsufficientDataError(f"need at least 1000 atoms, got {n}")
    scales = _check_scales(scales, n, span_decades=1.0)
    usable = _usable(scales, n)

    w = measure.weights
    total_w = float(w.sum())
    self_w = float(np.dot(w, w))
    denom = total_w * total_w - self_w
    if denom <= 0.0:
        raise DegenerateInputError("no off-diagonal pair weight")

    ext = np.concatenate(
        [measure.angles - _TWO_PI, measure.angles, measure.angles + _TWO_PI]
    )
    cum = np.concatenate(([0.0], np.cumsum(np.tile(w, 3))))
    corr = []
    for delta in usable:
        d = min(float(delta), math.pi)
        hi = np.searchsorted(ext, measure.angles + d, side="right")
        lo = np.searchsorted(ext, measure.angles - d, side="left")
        num = float(np.dot(w, cum[hi] - cum[lo])) - self_w
        corr.append(num / denom)
    corr = np.asarray(corr)
    if np.any(corr <= 0.0):
        raise DegenerateInputError("empty correlation sum at some scale")
    slope, stderr = _fit_loglog(usable, corr)
    return EstimateReport(
        name="correlation-dimension",
        estimate=slope,
        stderr=stderr,
        scales=(float(usable[0]), float(usable[-1])),
        points_per_scale=n,
        curve=list(zip(usable.tolist(), corr.tolist())),
    )


def holder_exponent(F, epsilons, domain=(0.0, _TWO_PI), grid_size=2048):
    """Modulus-of-continuity slope of a cumulative distribution function.

    M(eps) is the largest increment of F over a window of width eps,
    maximized across a sliding grid; the estimate is the slope of
    log M against log eps.
    """
    lo, hi = float(domain[0]), float(domain[1])
    width = hi - lo
    if not width > 0.0:
        raise ConfigError(f"empty domain {domain}")
    eps = np.asarray(sorted(float(e) for e in epsilons))
    if len(eps) < 4:
        raise InsufficientDataError(f"need at least 4 widths, got {len(eps)}")
    if np.any(eps <= 0.0) or eps[-1] >= width:
        raise InsufficientDataError("widths must lie inside the domain")
    atom_count = getattr(F, "atom_count", None)
    mask = eps <= width * _COARSE_FRACTION
    if atom_count:
        mask &= eps >= _RESOLUTION_FACTOR / atom_count * width / _TWO_PI
    eps = eps[mask]
    if len(eps) < 4:
        raise InsufficientDataError("fewer than 4 widths inside the window")

    probe = np.asarray(F(np.linspace(lo, hi, 512)))
    if probe.max() == probe.min():
        raise DegenerateInputError("cumulative function is flat")

    moduli = []
    for e in eps:
        xs = np.linspace(lo, hi - e, grid_size)
        moduli.append(float(np.max(np.asarray(F(xs + e)) - np.asarray(F(xs)))))
    moduli = np.asarray(moduli)
    keep = moduli > 0.0
    constant = np.all(moduli == moduli[0])
    if not constant and np.count_nonzero(keep) < 4:
        raise InsufficientDataError("modulus vanished at too many widths")
    if constant and moduli[0] <= 0.0:
        raise DegenerateInputError("modulus identically zero")
    slope, stderr = _fit_loglog(eps[keep], moduli[keep])
    return EstimateReport(
        name="holder-exponent",
        estimate=slope,
        stderr=stderr,
        scales=(float(eps[0]), float(eps[-1])),
        curve=list(zip(eps.tolist(), moduli.tolist())),
    )


def moment_exponent(
    config,
    k,
    epsilons,
    replicates,
    rng=None,
    onset=None,
    measure_source=None,
    threads=1,
):
    """Decay exponent of the k-th moment of centered-interval masses.

    For each width eps the mass of the boundary-line interval
    [-eps/2, eps/2] is raised to the k-th power and averaged over
    independent runs; the estimate is the slope of the averaged moment
    against eps in log-log coordinates. With an onset the typical
    sub-measure is used instead of the full projection.
    """
    if k < 2:
        raise ConfigError(f"moment order must be >= 2, got {k}")
    if replicates < 200:
        raise ConfigError(f"need at least 200 replicates, got {replicates}")
    eps = np.asarray(sorted(float(e) for e in epsilons))
    if len(eps) < 4:
        raise InsufficientDataError(f"need at least 4 widths, got {len(eps)}")
    if np.any(eps <= 0.0):
        raise InsufficientDataError("widths must be positive")
    if eps[-1] / eps[0] < 10.0 * (1.0 - 1e-9):
        raise InsufficientDataError("widths must span at least one decade")

    if rng is None:
        seeds = [rng_mod.subseed(config.seed, rng_mod.MOMENT_REPLICATES, i) for i in range(replicates)]
    else:
        seeds = [int(s) for s in rng.integers(0, 2**62, size=replicates)]
    intervals = [LineInterval(-e / 2.0, e / 2.0) for e in eps]

    def one(i):
        if measure_source is not None:
            meas = measure_source(i)
        else:
            snap = run(config.with_seed(seeds[i]))
            if onset is None:
                meas = project_to_boundary(snap)
            else:
                meas = typical_measure(snap, onset)
        return [interval_mass(meas, iv) ** k for iv in intervals]

    masses = np.asarray(map_indexed(one, replicates, threads))
    mean = masses.mean(axis=0)
    if np.any(mean == 0.0):
        raise InsufficientDataError("every replicate mass vanished at some width")
    slope, stderr = _fit_loglog(eps, mean)

    target = None
    provenance = ""
    if k == 2 and measure_source is None:
        if onset is None:
            target = min(2.0, 1.0 + config.beta / 3.0)
            provenance = "analytic second-moment bound for the full measure"
        else:
            target = min(2.0, 1.0 + 2.0 * config.beta)
            provenance = "analytic second-moment bound for the typical measure"
    return EstimateReport(
        name=f"moment-k{k}" + ("-typical" if onset is not None else "-full"),
        estimate=slope,
        stderr=stderr,
        scales=(float(eps[0]), float(eps[-1])),
        replicates=replicates,
        points_per_scale=replicates,
        target=target,
        provenance=provenance,
        curve=list(zip(eps.tolist(), mean.tolist())),
        params={"k": k, "onset": onset, "beta": getattr(config, "beta", None)},
    )
