"""Replicated dimension and Hölder studies over grown populations.

Both studies share a protocol: grow a tree until its population reaches a
target size (the horizon adapts through the branching rate, so slow rates
run longer), keep only replicates whose measure carries enough atoms, and
average the per-replicate fitted exponents.  Conditioning is done by
scanning a deterministic sequence of candidate seeds in index order, so
the accepted set does not depend on the thread count.
"""

from __future__ import annotations

import math
from dataclasses import replace

import numpy as np

from hypbbm.analysis.estimators import (
    _box_counts,
    _fit_loglog,
    box_dimension,
    holder_exponent,
    limit_set_dimension,
    support_dimension,
)
from hypbbm.analysis.reports import EstimateReport
from hypbbm.engine import SimConfig, run
from hypbbm.errors import ConditioningError, DegenerateInputError, InsufficientDataError
from hypbbm.measures import cdf, project_to_boundary, typical_measure
from hypbbm.parallel import map_indexed
from hypbbm.rng import DEFAULT_SEED, DIMENSION_REPLICATES, HOLDER_REPLICATES, subseed

DEFAULT_REPLICATES = 20
DEFAULT_POPULATION = 30_000
DEFAULT_STUDY_ONSET = 4.0
DEFAULT_MASS_FLOOR = 0.0
# Growth is stopped by the population cap, not the horizon; the slack buys
# enough extra time that the cap is reached before the horizon in practice.
_HORIZON_SLACK = 8.0
_ATTEMPT_FACTOR = 15
_LADDER_POINTS = 20
_MIN_DECADES = 1.5
_MIN_WINDOW_POINTS = 4


def _grown_config(beta, lam, dt, onset, seed, target_population, horizon):
    if horizon is None:
        horizon = (math.log(max(target_population, 2)) + _HORIZON_SLACK) / beta
    if onset > horizon:
        raise ConditioningError(
            f"onset {onset} exceeds the growth horizon {horizon:.3f}"
        )
    return SimConfig(
        beta=beta,
        lam=lam,
        dt=dt,
        horizon=horizon,
        onset=onset,
        seed=seed,
        max_particles=target_population,
    )


def _circular_span(angles):
    """Extent of the atom cloud: full circle minus the largest empty gap."""
    if angles.size < 2:
        return 0.0
    ordered = np.sort(angles)
    gaps = np.diff(ordered)
    wrap = 2.0 * math.pi - (ordered[-1] - ordered[0])
    return 2.0 * math.pi - max(float(gaps.max()), wrap)


def _probe_ladder(resolution_atoms):
    """Log-spaced scales covering the whole trustworthy range, from the
    floor of 10 atoms per scale unit up to an eighth of the circle."""
    lo = 10.0 / resolution_atoms
    hi = 0.999 * (2.0 * math.pi / 8.0)
    return np.logspace(math.log10(lo), math.log10(hi), _LADDER_POINTS)


def _select_window(eff_scales, mean_log_counts):
    """Indices of the contiguous stretch where the pooled curve is straightest.

    Grown clouds have no single clean scaling band.  Sparse ones are
    linear near the resolution floor and flatten coarse, where only a few
    early clumps remain; dense ones bend at fine scales, where boxes
    outnumber atoms, and only straighten once boxes fill up.  So the fit
    window is chosen by the curve itself: among stretches of at least
    _MIN_WINDOW_POINTS scales spanning _MIN_DECADES decades, take the one
    with the highest r-squared against a line.  Ties go to the finest
    stretch; stretches with no variation carry no slope signal and are
    skipped.
    """
    logx = np.log10(eff_scales)
    n = len(eff_scales)
    best = None
    best_r2 = -math.inf
    for i in range(n - _MIN_WINDOW_POINTS + 1):
        for j in range(i + _MIN_WINDOW_POINTS - 1, n):
            if logx[j] - logx[i] < _MIN_DECADES * (1.0 - 1e-9):
                continue
            x = logx[i : j + 1]
            y = mean_log_counts[i : j + 1]
            sst = float(((y - y.mean()) ** 2).sum())
            if sst <= 1e-12:
                continue
            coef = np.polyfit(x, y, 1)
            sse = float(((y - np.polyval(coef, x)) ** 2).sum())
            r2 = 1.0 - sse / sst
            if r2 > best_r2 + 1e-12:
                best, best_r2 = (i, j), r2
    if best is None:
        return 0, n - 1, 0.0
    return best[0], best[1], best_r2


def _epsilon_ladder(span, resolution_atoms):
    lo = max(span * 1e-3, 25.0 / resolution_atoms)
    hi = max(span / 8.0, lo * 10.0**1.1)
    return np.logspace(math.log10(lo), math.log10(hi), 10)


def _conditioned_measures(
    base,
    seed,
    tag,
    replicates,
    min_atoms,
    extract,
    threads,
    attempt_factor,
):
    """First `replicates` candidate seeds (in index order) whose measure
    carries at least min_atoms atoms.  Thread-count invariant by construction.
    """

    def _candidate(j):
        cfg = replace(base, seed=subseed(seed, tag, j))
        snapshot = run(cfg)
        measure = extract(snapshot)
        if measure.angles.size < min_atoms:
            return None
        return measure

    max_attempts = replicates * attempt_factor
    batch = max(int(threads), 1) * 4
    accepted = []
    last_index = -1
    next_j = 0
    while len(accepted) < replicates and next_j < max_attempts:
        start = next_j
        count = min(batch, max_attempts - start)
        outs = map_indexed(lambda i: _candidate(start + i), count, threads)
        for offset, measure in enumerate(outs):
            if measure is not None and len(accepted) < replicates:
                accepted.append(measure)
                last_index = start + offset
        next_j = start + count
    if len(accepted) < replicates:
        raise ConditioningError(
            f"only {len(accepted)} of {replicates} replicates reached "
            f"{min_atoms} atoms within {max_attempts} attempts"
        )
    return accepted, last_index + 1


def _mean_curve(curves):
    common = set(curves[0])
    for curve in curves[1:]:
        common &= set(curve)
    deltas = sorted(common)
    return [
        (delta, float(np.mean([curve[delta] for curve in curves])))
        for delta in deltas
    ]


def _aggregate(name, estimates, curves, scales, target, provenance, params):
    values = np.asarray(estimates, dtype=np.float64)
    stderr = float(values.std(ddof=1) / math.sqrt(values.size)) if values.size > 1 else 0.0
    return EstimateReport(
        name=name,
        estimate=float(values.mean()),
        stderr=stderr,
        scales=(float(scales[0]), float(scales[-1])),
        replicates=int(values.size),
        target=target,
        provenance=provenance,
        curve=_mean_curve(curves),
        params=params,
    )


def dimension_study(
    beta,
    mode="support",
    replicates=DEFAULT_REPLICATES,
    target_population=DEFAULT_POPULATION,
    lam=0.0,
    dt=0.01,
    onset=DEFAULT_STUDY_ONSET,
    seed=DEFAULT_SEED,
    scales=None,
    mass_floor=DEFAULT_MASS_FLOOR,
    min_atoms=None,
    horizon=None,
    threads=1,
    attempt_factor=_ATTEMPT_FACTOR,
):
    """Replicated box-dimension estimate of the boundary atom cloud.

    mode="support" measures the cloud of typicality survivors; it conditions
    each replicate on retaining min_atoms of them (pruning kills the whole
    cloud with noticeable probability, which would starve the estimator).
    mode="all-points" measures every particle's exit point.
    """
    if mode not in ("support", "all-points"):
        raise ValueError(f"unknown mode {mode!r}")
    if replicates < 2:
        raise ConditioningError("at least 2 replicates are required")
    base = _grown_config(beta, lam, dt, onset, seed, target_population, horizon)
    if mode == "support":
        if min_atoms is None:
            min_atoms = max(target_population // 5, 1000)
        extract = lambda snap: typical_measure(snap, onset)
    else:
        if min_atoms is None:
            min_atoms = max(target_population // 2, 1000)
        extract = project_to_boundary
    measures, attempts = _conditioned_measures(
        base, seed, DIMENSION_REPLICATES, replicates, min_atoms, extract,
        threads, attempt_factor,
    )
    estimates = []
    curves = []
    rejected = 0
    if scales is not None:
        # The caller fixed the fit window; honor it as given.
        ladder = np.asarray(scales, dtype=np.float64)
        window = (float(ladder[0]), float(ladder[-1]))
        window_r2 = None
        for measure in measures:
            try:
                report = box_dimension(
                    measure, ladder, mode=mode, mass_floor=mass_floor
                )
            except (DegenerateInputError, InsufficientDataError):
                rejected += 1
                continue
            estimates.append(report.estimate)
            curves.append(dict(report.curve))
    else:
        ladder = _probe_ladder(min_atoms)
        per_replicate = [
            _box_counts(measure, ladder, mode, mass_floor) for measure in measures
        ]
        eff = per_replicate[0][0]
        counts = np.vstack([c for _, c in per_replicate])
        pooled = np.log10(np.maximum(counts, 1.0)).mean(axis=0)
        lo, hi, window_r2 = _select_window(eff, pooled)
        window = (float(eff[lo]), float(eff[hi]))
        for row in counts:
            piece = row[lo : hi + 1]
            keep = piece > 0.0
            if np.count_nonzero(keep) < _MIN_WINDOW_POINTS:
                rejected += 1
                continue
            slope, _ = _fit_loglog(eff[lo : hi + 1][keep], piece[keep], flip_x=True)
            estimates.append(slope)
        curves = [dict(zip(eff.tolist(), row.tolist())) for row in counts]
    if len(estimates) < 2:
        raise ConditioningError(
            f"box counting degenerated on {rejected} of {len(measures)} replicates"
        )
    if mode == "support":
        target = support_dimension(beta, lam)
    else:
        target = limit_set_dimension(beta, lam)
    if mode == "support":
        what = "typicality-surviving atoms"
    else:
        what = "every boundary atom (heuristic closure proxy)"
    return _aggregate(
        name=f"box-dimension-{mode}",
        estimates=estimates,
        curves=curves,
        scales=window,
        target=target,
        provenance=(
            f"mean of per-replicate box-count slopes of {what}, fit on the "
            "straightest stretch of the pooled curve; finite-horizon estimate "
            "of an asymptotic quantity"
        ),
        params={
            "beta": beta,
            "lambda": lam,
            "dt": dt,
            "onset": onset,
            "population": target_population,
            "min_atoms": int(min_atoms),
            "mass_floor": mass_floor,
            "mode": mode,
            "attempts": attempts,
            "degenerate_replicates": rejected,
            "horizon": base.horizon,
            "window_r2": window_r2,
        },
    )


def holder_study(
    beta,
    replicates=DEFAULT_REPLICATES,
    target_population=DEFAULT_POPULATION,
    lam=0.0,
    dt=0.01,
    onset=DEFAULT_STUDY_ONSET,
    seed=DEFAULT_SEED,
    epsilons=None,
    min_atoms=None,
    horizon=None,
    threads=1,
    attempt_factor=_ATTEMPT_FACTOR,
):
    """Replicated modulus-of-continuity exponent of the weighted cdf."""
    if replicates < 2:
        raise ConditioningError("at least 2 replicates are required")
    if min_atoms is None:
        min_atoms = max(target_population // 5, 1000)
    base = _grown_config(beta, lam, dt, onset, seed, target_population, horizon)
    measures, attempts = _conditioned_measures(
        base, seed, HOLDER_REPLICATES, replicates, min_atoms,
        lambda snap: typical_measure(snap, onset),
        threads, attempt_factor,
    )
    if epsilons is None:
        ladder = _epsilon_ladder(_circular_span(measures[0].angles), min_atoms)
    else:
        ladder = np.asarray(epsilons, dtype=np.float64)
    estimates = []
    curves = []
    rejected = 0
    for measure in measures:
        try:
            report = holder_exponent(cdf(measure), ladder)
        except (DegenerateInputError, InsufficientDataError):
            rejected += 1
            continue
        estimates.append(report.estimate)
        curves.append(dict(report.curve))
    if len(estimates) < 2:
        raise ConditioningError(
            f"modulus fit degenerated on {rejected} of {len(measures)} replicates"
        )
    return _aggregate(
        name="holder-exponent",
        estimates=estimates,
        curves=curves,
        scales=ladder,
        target=min(0.5, beta / 3.0) if lam == 0.0 else None,
        provenance="mean of per-replicate modulus-of-continuity slopes",
        params={
            "beta": beta,
            "lambda": lam,
            "dt": dt,
            "onset": onset,
            "population": target_population,
            "min_atoms": int(min_atoms),
            "attempts": attempts,
            "degenerate_replicates": rejected,
            "horizon": base.horizon,
        },
    )
