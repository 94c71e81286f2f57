"""Monte Carlo checks of the exact identities behind the model.

Each validator estimates both sides of an identity (or compares an
estimate against a closed form) and reports a z-score. All randomness is
derived from the configuration seed unless a generator is supplied, so
repeated calls agree bit for bit.
"""

import math
from dataclasses import replace

import numpy as np
from scipy import stats

from hypbbm import rng as rng_mod
from hypbbm.diffusion import (
    advance_states,
    exit_cdf,
    run_paths,
    sample_exit,
    segment_times,
)
from hypbbm.engine import run, typical_count, typical_mask
from hypbbm.errors import ConditioningError, ConfigError
from hypbbm.measures import LineInterval
from hypbbm.parallel import map_indexed
from hypbbm.analysis.reports import make_validation

# Asymptotic mean and standard deviation of the one-sample
# Kolmogorov-Smirnov statistic under the null, times sqrt(n).
_KS_NULL_MEAN = 0.8687
_KS_NULL_SD = 0.26


def _seeds(config, tag, n, rng):
    if rng is None:
        return [rng_mod.subseed(config.seed, tag, i) for i in range(n)]
    return [int(s) for s in rng.integers(0, 2**62, size=n)]


def _stream(config, tag, rng):
    if rng is None:
        return rng_mod.stream(config.seed, tag)
    return rng_mod.stream(int(rng.integers(0, 2**62)))


def _endpoints(interval):
    if isinstance(interval, LineInterval):
        return float(interval.a), float(interval.b)
    a, b = interval
    return float(a), float(b)


def interval_exit_probability(x, y, a, b, lam=0.0):
    """Exact chance that the motion from (x, y) lands inside [a, b].

    Accepts broadcastable arrays in any argument; a reversed interval
    has zero mass.
    """
    return np.maximum(exit_cdf(b, x, y, lam) - exit_cdf(a, x, y, lam), 0.0)


def validate_many_to_one(
    config,
    t,
    f="one",
    runs=10_000,
    rng=None,
    interval=(-1.0, 1.0),
    single_samples=None,
    threads=1,
):
    """First-moment identity: the branching sum of a path functional
    equals the exponentially grown single-particle expectation.

    f selects the functional: "one" counts particles (exact right side),
    "interval" flags a final horizontal coordinate inside the interval,
    "envelope" flags paths that stay typical from the configured onset.
    """
    if f not in ("one", "interval", "envelope"):
        raise ConfigError(f"unknown test-function tag {f!r}")
    beta = config.beta
    growth = math.exp(beta * t)
    seeds = _seeds(config, rng_mod.MANY_TO_ONE_RUNS, runs, rng)
    a, b = _endpoints(interval)
    onset = config.onset

    def one(i):
        snap = run(replace(config, horizon=t, seed=seeds[i]))
        if f == "one":
            return snap.population
        if f == "interval":
            return int(np.count_nonzero((snap.x >= a) & (snap.x <= b)))
        return typical_count(snap, onset)

    values = np.asarray(map_indexed(one, runs, threads), dtype=float)
    lhs = float(values.mean())
    lhs_se = float(values.std(ddof=1) / math.sqrt(runs))

    if f == "one":
        rhs, rhs_se, rhs_n = growth, 0.0, None
    else:
        n1 = single_samples if single_samples is not None else 10 * runs
        gen = _stream(config, rng_mod.MANY_TO_ONE_SINGLES, rng)
        if f == "interval":
            xs, _ = run_paths(n1, t, config.diffusion, gen)
            p = float(np.count_nonzero((xs >= a) & (xs <= b))) / n1
        else:
            _, _, ok = run_paths(n1, t, config.diffusion, gen, envelope_onset=onset)
            p = float(np.count_nonzero(ok)) / n1
        rhs = growth * p
        rhs_se = growth * math.sqrt(max(p * (1.0 - p), 0.0) / n1)
        rhs_n = n1

    return make_validation(
        f"many-to-one-{f}",
        lhs,
        lhs_se,
        rhs,
        rhs_se,
        lhs_n=runs,
        rhs_n=rhs_n,
        extras={"t": t, "beta": beta, "normalized_lhs": lhs / growth},
    )


def _pair_probability(config, r, t, m, a, b, gen):
    """Both-in-interval chance for two motions sharing the path up to r."""
    params = config.diffusion
    x = np.zeros(m)
    logy = np.zeros(m)
    if r > 0.0:
        times, _ = segment_times(0.0, r, params.dt)
        x, logy = advance_states(x, logy, 0.0, times, params, gen)
    inside = np.ones(m, dtype=bool)
    if t > r:
        times, _ = segment_times(r, t, params.dt)
        for _branch in range(2):
            xb, _ = advance_states(x, logy, r, times, params, gen)
            inside &= (xb >= a) & (xb <= b)
    else:
        inside = (x >= a) & (x <= b)
    return float(np.count_nonzero(inside)) / m


def validate_many_to_two(
    config,
    interval,
    t,
    runs=10_000,
    rng=None,
    pair_samples=None,
    nodes=64,
    threads=1,
):
    """Second-moment identity for the mean-normalized particle count in an
    interval: branching replicates against the split-time integral over a
    pair of partially coupled motions.

    The whole-line case integrates in closed form, leaving only the
    population second moment to Monte Carlo.
    """
    a, b = _endpoints(interval)
    beta = config.beta
    scale = math.exp(-beta * t)
    seeds = _seeds(config, rng_mod.MANY_TO_TWO_RUNS, runs, rng)

    def one(i):
        snap = run(replace(config, horizon=t, seed=seeds[i]))
        count = int(np.count_nonzero((snap.x >= a) & (snap.x <= b)))
        return (scale * count) ** 2

    values = np.asarray(map_indexed(one, runs, threads))
    lhs = float(values.mean())
    lhs_se = float(values.std(ddof=1) / math.sqrt(runs))

    extras = {"t": t, "beta": beta, "interval": [a, b]}
    if a == -math.inf and b == math.inf:
        rhs = 2.0 - scale
        rhs_se = 0.0
        rhs_n = None
    else:
        m = pair_samples if pair_samples is not None else runs
        gen = _stream(config, rng_mod.MANY_TO_TWO_PAIRS, rng)
        xs, _ = run_paths(m, t, config.diffusion, gen)
        p1 = float(np.count_nonzero((xs >= a) & (xs <= b))) / m
        p1_se = math.sqrt(max(p1 * (1.0 - p1), 0.0) / m)

        r_nodes = np.concatenate(([0.0], t * np.logspace(-3.0, 0.0, nodes)))
        g = np.empty(len(r_nodes))
        g_se = np.empty(len(r_nodes))
        for j, r in enumerate(r_nodes):
            pj = _pair_probability(config, float(r), t, m, a, b, gen)
            g[j] = pj
            g_se[j] = math.sqrt(max(pj * (1.0 - pj), 0.0) / m)
        integrand = 2.0 * beta * np.exp(-beta * r_nodes) * g
        integral = float(np.trapezoid(integrand, r_nodes))

        w = np.empty(len(r_nodes))
        w[0] = (r_nodes[1] - r_nodes[0]) / 2.0
        w[-1] = (r_nodes[-1] - r_nodes[-2]) / 2.0
        w[1:-1] = (r_nodes[2:] - r_nodes[:-2]) / 2.0
        var = float(np.sum((w * 2.0 * beta * np.exp(-beta * r_nodes) * g_se) ** 2))
        rhs = integral + scale * p1
        rhs_se = math.sqrt(var + (scale * p1_se) ** 2)
        rhs_n = m
        extras["single_probability"] = p1
        extras["split_nodes"] = nodes + 1

    return make_validation(
        "many-to-two",
        lhs,
        lhs_se,
        rhs,
        rhs_se,
        lhs_n=runs,
        rhs_n=rhs_n,
        extras=extras,
    )


def validate_harmonic_martingale(config, interval, t, runs=10_000, rng=None, threads=1):
    """The mean-normalized sum of exit probabilities over the population
    is a martingale: its expectation stays at the starting value."""
    a, b = _endpoints(interval)
    beta = config.beta
    scale = math.exp(-beta * t)
    seeds = _seeds(config, rng_mod.HARMONIC_RUNS, runs, rng)

    def one(i):
        snap = run(replace(config, horizon=t, seed=seeds[i]))
        y = np.maximum(np.exp(snap.logY), np.finfo(float).tiny)
        h = interval_exit_probability(snap.x, y, a, b, config.lam)
        return scale * float(np.sum(h))

    values = np.asarray(map_indexed(one, runs, threads))
    lhs = float(values.mean())
    lhs_se = float(values.std(ddof=1) / math.sqrt(runs))
    rhs = float(interval_exit_probability(0.0, 1.0, a, b, config.lam))
    return make_validation(
        "harmonic-martingale",
        lhs,
        lhs_se,
        rhs,
        0.0,
        lhs_n=runs,
        extras={"t": t, "beta": beta, "interval": [a, b]},
    )


def validate_exit_bound(
    ys=None,
    widths=None,
    samples=100_000,
    rng=None,
    lam=0.0,
    seed=rng_mod.DEFAULT_SEED,
):
    """Interval exit probabilities scale like width over height, capped
    at the central density of the exit law; checked in closed form on a
    grid, with the location-scale property verified by sampling."""
    if ys is None:
        ys = np.logspace(-1.0, 1.0, 13)
    if widths is None:
        widths = np.logspace(-2.0, 0.0, 13)
    ys = np.asarray(ys, dtype=float)
    widths = np.asarray(widths, dtype=float)
    if np.any(ys <= 0.0) or np.any(widths <= 0.0):
        raise ConfigError("heights and widths must be positive")

    yy, ww = np.meshgrid(ys, widths)
    probs = interval_exit_probability(0.0, yy, -ww / 2.0, ww / 2.0, lam)
    ratios = probs * yy / ww
    sup_ratio = float(np.max(ratios))
    df = 1.0 + 2.0 * lam
    density_bound = float(stats.t.pdf(0.0, df) * math.sqrt(df)) if lam else 1.0 / math.pi
    saturation = float(
        interval_exit_probability(0.0, float(ys.min()), -50.0, 50.0, lam)
    )

    if rng is None:
        rng = rng_mod.stream(seed, rng_mod.EXIT_BOUND_SAMPLES)
    big = sample_exit(np.zeros(samples), np.full(samples, 2.0), rng, lam)
    small = sample_exit(np.zeros(samples), np.ones(samples), rng, lam)
    p_big = float(np.count_nonzero(np.abs(big) <= 1.0)) / samples
    p_small = float(np.count_nonzero(np.abs(small) <= 0.5)) / samples
    se_big = math.sqrt(max(p_big * (1.0 - p_big), 0.0) / samples)
    se_small = math.sqrt(max(p_small * (1.0 - p_small), 0.0) / samples)

    return make_validation(
        "exit-bound",
        p_big,
        se_big,
        p_small,
        se_small,
        lhs_n=samples,
        rhs_n=samples,
        extras={
            "sup_ratio": sup_ratio,
            "ratio_bound": density_bound,
            "saturation_probability": saturation,
        },
    )


def validate_exit_law(config, t, samples=100_000, rng=None):
    """End-to-end check of the discretized path plus exact residual
    against the closed-form exit law, as a Kolmogorov-Smirnov distance."""
    params = config.diffusion
    gen_path = _stream(config, rng_mod.EXIT_LAW_PATHS, rng)
    gen_exit = _stream(config, rng_mod.EXIT_LAW_RESIDUALS, rng)
    x, logy = run_paths(samples, t, params, gen_path)
    exits = sample_exit(x, np.exp(logy), gen_exit, config.lam)
    ks = stats.kstest(exits, lambda v: exit_cdf(v, 0.0, 1.0, config.lam)).statistic
    root_n = math.sqrt(samples)
    return make_validation(
        "exit-law",
        float(ks),
        _KS_NULL_SD / root_n,
        _KS_NULL_MEAN / root_n,
        0.0,
        lhs_n=samples,
        extras={
            "ks": float(ks),
            "median": float(np.median(exits)),
            "t": t,
            "dt": params.dt,
        },
    )


def validate_growth_rate(
    config,
    onset=None,
    generations=10,
    runs=200,
    rng=None,
    max_attempts_factor=50,
):
    """Geometric mean of typical-descendant counts along a re-marked
    lineage, against the exponential of the branching rate times the
    stage length.

    Each accepted run re-marks a uniformly chosen typical descendant at
    every stage boundary; runs that hit an empty typical set at any stage
    are rejected and resampled, conditioning on survival of the typical
    population.
    """
    if onset is None:
        onset = config.onset
    if onset <= 0.0:
        raise ConfigError(f"stage length must be > 0, got {onset}")
    if generations < 1:
        raise ConfigError(f"generations must be >= 1, got {generations}")
    if generations * onset > config.horizon * (1.0 + 1e-9):
        raise ConfigError(
            f"{generations} stages of length {onset} exceed the horizon {config.horizon}"
        )
    base = replace(config, horizon=onset, onset=onset)
    max_attempts = runs * max_attempts_factor
    attempt_seeds = _seeds(config, rng_mod.GROWTH_ATTEMPTS, max_attempts, rng)

    statistics = []
    attempts = 0
    while len(statistics) < runs:
        if attempts >= max_attempts:
            raise ConditioningError(
                f"{attempts} attempts produced only {len(statistics)} accepted runs"
            )
        aseed = attempt_seeds[attempts]
        attempts += 1
        picker = rng_mod.stream(aseed, rng_mod.GROWTH_PICKS)
        state = (0.0, 0.0)
        t0 = 0.0
        logs = []
        for j in range(generations):
            stage = replace(base, seed=rng_mod.subseed(aseed, rng_mod.GROWTH_STAGES, j))
            snap = run(stage, start=state, t0=t0)
            mask = typical_mask(snap, onset)
            n_typ = int(np.count_nonzero(mask))
            if n_typ == 0:
                break
            logs.append(math.log(n_typ))
            chosen = np.flatnonzero(mask)[picker.integers(n_typ)]
            state = (float(snap.x[chosen]), float(snap.logY[chosen]))
            t0 = snap.time
        else:
            statistics.append(math.exp(-sum(logs) / generations))

    values = np.asarray(statistics)
    lhs = float(values.mean())
    lhs_se = float(values.std(ddof=1) / math.sqrt(runs))
    rhs = math.exp(-config.beta * onset)
    return make_validation(
        "growth-rate",
        lhs,
        lhs_se,
        rhs,
        0.0,
        lhs_n=runs,
        extras={
            "generations": generations,
            "stage_length": onset,
            "attempts": attempts,
            "accepted": runs,
        },
    )
