"""Identity validators: both sides agree within Monte Carlo error on
small budgets, and the exact sides are exact."""

import math

import numpy as np
import pytest

from hypbbm.analysis.validators import (
    interval_exit_probability,
    validate_exit_bound,
    validate_exit_law,
    validate_growth_rate,
    validate_harmonic_martingale,
    validate_many_to_one,
    validate_many_to_two,
)
from hypbbm.engine import SimConfig
from hypbbm.errors import ConfigError
from hypbbm.measures import LineInterval


def cfg(beta=0.5, horizon=4.0, **kw):
    kw.setdefault("dt", 0.05)
    kw.setdefault("onset", 1.0)
    return SimConfig(beta=beta, horizon=horizon, **kw)


class TestManyToOne:
    def test_counting_functional_matches_growth(self):
        report = validate_many_to_one(cfg(), t=4.0, f="one", runs=3000)
        assert report.rhs == pytest.approx(math.exp(2.0), rel=1e-12)
        assert report.rhs_se == 0.0
        assert abs(report.z) <= 3.0
        assert report.extras["normalized_lhs"] == pytest.approx(1.0, abs=0.05)

    def test_interval_functional(self):
        report = validate_many_to_one(
            cfg(), t=2.0, f="interval", runs=2000, single_samples=20_000
        )
        assert abs(report.z) <= 3.5

    def test_envelope_functional(self):
        report = validate_many_to_one(
            cfg(), t=2.0, f="envelope", runs=2000, single_samples=20_000
        )
        assert abs(report.z) <= 3.5
        assert report.lhs > 0.0

    def test_unknown_functional_rejected(self):
        with pytest.raises(ConfigError):
            validate_many_to_one(cfg(), t=1.0, f="mean")

    def test_deterministic_given_seed(self):
        a = validate_many_to_one(cfg(), t=1.0, f="one", runs=300)
        b = validate_many_to_one(cfg(), t=1.0, f="one", runs=300)
        assert a.lhs == b.lhs and a.z == b.z


class TestManyToTwo:
    def test_whole_line_closed_form(self):
        report = validate_many_to_two(
            cfg(), (-math.inf, math.inf), t=2.0, runs=3000
        )
        assert report.rhs == pytest.approx(2.0 - math.exp(-1.0), rel=1e-12)
        assert report.rhs_se == 0.0
        assert abs(report.z) <= 3.0

    def test_empty_interval_vanishes_on_both_sides(self):
        report = validate_many_to_two(
            cfg(), LineInterval(1.0, -1.0), t=1.0, runs=200, pair_samples=500
        )
        assert report.lhs == 0.0
        assert report.rhs == 0.0
        assert report.z == 0.0

    def test_closed_interval_couples_to_pair_integral(self):
        report = validate_many_to_two(
            cfg(), (-1.0, 1.0), t=3.0, runs=2000, pair_samples=20_000, nodes=32
        )
        assert abs(report.z) <= 3.5
        assert report.extras["split_nodes"] == 33
        assert 0.0 < report.extras["single_probability"] < 1.0


class TestHarmonicMartingale:
    def test_whole_line_is_population_martingale(self):
        report = validate_harmonic_martingale(
            cfg(), (-math.inf, math.inf), t=2.0, runs=2000
        )
        assert report.rhs == 1.0
        assert abs(report.z) <= 3.0

    def test_positive_halfline_starts_at_half(self):
        report = validate_harmonic_martingale(
            cfg(), (0.0, math.inf), t=3.0, runs=3000
        )
        assert report.rhs == 0.5
        assert abs(report.z) <= 3.0


@pytest.mark.parametrize("beta", [0.25, 0.5, 1.0])
def test_identities_hold_across_branching_rates(beta):
    config = cfg(beta=beta, horizon=2.0)
    m2o = validate_many_to_one(
        config, t=2.0, f="interval", runs=1200, single_samples=12_000
    )
    m2t = validate_many_to_two(
        config, (-1.0, 1.0), t=2.0, runs=1200, pair_samples=12_000, nodes=32
    )
    harm = validate_harmonic_martingale(config, (-1.0, 1.0), t=2.0, runs=1200)
    for report in (m2o, m2t, harm):
        assert abs(report.z) <= 3.0, (report.name, report.z)


class TestExitBound:
    def test_ratio_bounded_by_central_density(self):
        report = validate_exit_bound(samples=40_000)
        assert report.extras["sup_ratio"] <= 1.0 / math.pi + 0.02
        assert report.extras["ratio_bound"] == pytest.approx(1.0 / math.pi)
        # Wide intervals absorb essentially everything.
        assert 0.99 < report.extras["saturation_probability"] <= 1.0
        # Location-scale: doubling height and width leaves the law alone.
        assert abs(report.z) <= 3.0

    def test_rejects_nonpositive_grid(self):
        with pytest.raises(ConfigError):
            validate_exit_bound(ys=[0.5, -1.0], widths=[0.1, 0.2])

    def test_drifted_bound_uses_matching_density(self):
        report = validate_exit_bound(samples=20_000, lam=1.0)
        assert report.extras["sup_ratio"] <= report.extras["ratio_bound"] + 0.02


class TestExitLaw:
    def test_zero_horizon_hits_null_distribution(self):
        report = validate_exit_law(cfg(horizon=1.0), t=0.0, samples=10_000)
        assert report.lhs < 0.03
        # The reference point is the null mean of the scaled statistic.
        assert abs(report.z) <= 4.0
        assert abs(report.extras["median"]) < 0.02

    def test_short_horizon_fine_grid(self):
        report = validate_exit_law(
            cfg(horizon=1.0, dt=0.01), t=1.0, samples=20_000
        )
        assert report.lhs < 0.015
        assert report.extras["dt"] == 0.01


class TestGrowthRate:
    def test_single_stage_statistic_is_reciprocal_count(self):
        report = validate_growth_rate(
            cfg(beta=0.5, horizon=1.0), generations=1, runs=300
        )
        assert 0.2 < report.lhs <= 1.0
        assert report.rhs == pytest.approx(math.exp(-0.5))
        assert report.extras["accepted"] == 300
        assert report.extras["attempts"] >= 300

    def test_stage_grid_errors(self):
        with pytest.raises(ConfigError):
            validate_growth_rate(cfg(horizon=1.0, onset=0.0), runs=10)
        with pytest.raises(ConfigError):
            validate_growth_rate(cfg(horizon=1.0), generations=0, runs=10)
        with pytest.raises(ConfigError):
            validate_growth_rate(cfg(horizon=1.0), generations=3, runs=10)


def test_interval_exit_probability_closed_form():
    # Centered unit-height interval chance is arctan based.
    p = interval_exit_probability(0.0, 1.0, -1.0, 1.0)
    assert p == pytest.approx(0.5)
    assert interval_exit_probability(0.0, 1.0, 1.0, -1.0) == 0.0
    grid = interval_exit_probability(0.0, np.array([1.0, 2.0]), -1.0, 1.0)
    assert grid.shape == (2,)


def test_report_dictionary_shape():
    report = validate_many_to_one(cfg(), t=1.0, f="one", runs=200)
    d = report.to_dict()
    assert set(d) == {
        "name", "lhs", "lhs_se", "rhs", "rhs_se", "z", "lhs_n", "rhs_n", "extras",
    }
    assert d["name"] == "many-to-one-one"
