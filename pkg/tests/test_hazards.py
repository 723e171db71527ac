"""Hazard families: closed-form values, inverses, decomposition, validation."""

import numpy as np
import pytest
from scipy import special, stats
from scipy.optimize import brentq

from frailtykit import (
    Family,
    HazardSpec,
    cumulative_hazard,
    decomposition,
    hazard_rate,
    hazard_spec_from_dict,
    hazard_spec_to_dict,
    inverse_cumulative_hazard,
    validate_family,
)
from frailtykit._quad import integrate_power_substituted

from helpers import ALL_FAMILIES, random_hazard


def test_hazard_rate_known_values():
    assert hazard_rate(HazardSpec(Family.EXPONENTIAL, 1.0, 0.5), 2.0) == 0.5
    assert abs(hazard_rate(HazardSpec(Family.WEIBULL, 2.0, 1.0), 1.5)
               - 3.0) < 1e-15
    assert abs(hazard_rate(HazardSpec(Family.LOGLOGISTIC, 1.0, 1.0), 1.0)
               - 0.5) < 1e-15
    # density over survival at t=1 for the unit-scale shape-2 gamma
    # distribution: e^{-1} / (2 e^{-1}) = 1/2
    assert abs(hazard_rate(HazardSpec(Family.GAMMA, 2.0, 1.0), 1.0)
               - 0.5) < 1e-14


def test_cumulative_hazard_known_values():
    assert abs(cumulative_hazard(HazardSpec(Family.WEIBULL, 2.0, 1.0), 1.5)
               - 2.25) < 1e-15
    assert abs(cumulative_hazard(HazardSpec(Family.LOGLOGISTIC, 1.0, 2.0), 3.0)
               - np.log(7.0)) < 1e-15
    for family in ALL_FAMILIES:
        spec = HazardSpec(family, 1.0, 0.7)
        assert cumulative_hazard(spec, 0.0) == 0.0


def test_gamma_hazard_matches_density_over_survival():
    rng = np.random.default_rng(7)
    for _ in range(60):
        g = rng.uniform(0.3, 6.0)
        a = rng.uniform(0.2, 3.0)
        t = rng.uniform(0.01, 30.0)
        ref = stats.gamma.pdf(t, g, scale=1.0 / a) / stats.gamma.sf(
            t, g, scale=1.0 / a)
        mine = hazard_rate(HazardSpec(Family.GAMMA, g, a), t)
        assert abs(mine - ref) < 1e-11 * ref


def test_gamma_hazard_stable_deep_in_the_tail():
    # naive density / survival is 0/0 here; the factored form is not
    spec = HazardSpec(Family.GAMMA, 2.0, 1.0)
    h = hazard_rate(spec, 800.0)
    # h -> alpha from below, gap ~ (gamma - 1)/t
    assert abs(h - (1.0 - 1.0 / 801.0)) < 1e-12


def test_inverse_round_trip_all_families():
    rng = np.random.default_rng(21)
    for _ in range(200):
        spec = random_hazard(rng, gamma_range=(0.5, 3.0),
                             alpha_range=(0.2, 2.0))
        t = float(rng.uniform(0.05, 20.0))
        v = cumulative_hazard(spec, t)
        back = inverse_cumulative_hazard(spec, v)
        assert abs(back - t) < 1e-9 * t


def test_inverse_known_values():
    assert abs(inverse_cumulative_hazard(HazardSpec(Family.WEIBULL, 2.0, 1.0),
                                         2.25) - 1.5) < 1e-12
    for family in ALL_FAMILIES:
        assert inverse_cumulative_hazard(HazardSpec(family, 1.0, 0.8),
                                         0.0) == 0.0
    # shape-2 unit-scale gamma: root of -log survival = 1
    spec = HazardSpec(Family.GAMMA, 2.0, 1.0)
    ref = brentq(lambda t: -np.log(special.gammaincc(2.0, t)) - 1.0,
                 0.1, 10.0, rtol=1e-14)
    assert abs(inverse_cumulative_hazard(spec, 1.0) - ref) < 1e-10 * ref


def test_quadrature_recovers_cumulative_hazard():
    rng = np.random.default_rng(33)
    for _ in range(80):
        spec = random_hazard(rng, gamma_range=(0.5, 3.0),
                             alpha_range=(0.2, 2.0))
        t = float(rng.uniform(0.1, 10.0))
        ref = cumulative_hazard(spec, t)
        power = 1.0 / spec.gamma if spec.gamma < 1.0 else 1.0
        val, _ = integrate_power_substituted(
            lambda u: np.asarray(
                [hazard_rate(spec, float(x)) for x in np.atleast_1d(u)])[:, None],
            t, power, rel_tol=1e-11)
        assert abs(val[0] - ref) < 1e-8 * max(ref, 1e-12)


def test_positivity_and_monotonicity_sweep():
    rng = np.random.default_rng(5)
    grid = np.linspace(0.0, 15.0, 100)
    for family in ALL_FAMILIES:
        for _ in range(10):
            gamma = 1.0 if family is Family.EXPONENTIAL else float(
                rng.uniform(0.2, 5.0))
            alpha = float(rng.uniform(0.2, 5.0))
            spec = HazardSpec(family, gamma, alpha)
            hs = [hazard_rate(spec, float(t)) for t in grid[1:]]
            assert min(hs) >= 0.0
            cums = np.array([cumulative_hazard(spec, float(t)) for t in grid])
            assert cums[0] == 0.0
            assert np.all(np.diff(cums) >= 0.0)


def test_decomposition_reassembles_hazard():
    rng = np.random.default_rng(13)
    for _ in range(40):
        spec = random_hazard(rng, gamma_range=(0.4, 4.0))
        dec = decomposition(spec)
        for t in rng.uniform(0.05, 8.0, size=5):
            rebuilt = dec.a_value * t ** (spec.gamma - 1.0) * float(
                dec.b_at(t))
            assert abs(rebuilt - hazard_rate(spec, float(t))) < 1e-10 * max(
                rebuilt, 1e-12)


def test_b_factor_tends_to_one():
    for spec in (HazardSpec(Family.WEIBULL, 2.0, 1.0),
                 HazardSpec(Family.EXPONENTIAL, 1.0, 3.0),
                 HazardSpec(Family.GAMMA, 3.0, 0.1),
                 HazardSpec(Family.LOGLOGISTIC, 1.5, 3.0)):
        b = float(decomposition(spec).b_at(1e-8))
        assert abs(b - 1.0) < 1e-6


def test_validate_family_reports():
    for spec in (HazardSpec(Family.WEIBULL, 2.0, 1.0),
                 HazardSpec(Family.GAMMA, 3.0, 0.1),
                 HazardSpec(Family.LOGLOGISTIC, 1.5, 3.0),
                 HazardSpec(Family.EXPONENTIAL, 1.0, 0.5)):
        report = validate_family(spec)
        assert report.passed, (spec, report)
    # a very flat loglogistic honestly fails the small-time limit check:
    # b(1e-8) = 1/(1 + 3e-4)
    report = validate_family(HazardSpec(Family.LOGLOGISTIC, 0.5, 3.0))
    assert not report.b_limit_ok
    assert report.a_monotone_ok


def test_spec_validation_errors():
    with pytest.raises(ValueError):
        HazardSpec(Family.WEIBULL, -1.0, 1.0)
    with pytest.raises(ValueError):
        HazardSpec(Family.WEIBULL, 1.0, 0.0)
    with pytest.raises(ValueError):
        HazardSpec(Family.EXPONENTIAL, 2.0, 1.0)
    with pytest.raises(ValueError):
        hazard_rate(HazardSpec(Family.WEIBULL, 2.0, 1.0), 0.0)
    with pytest.raises(ValueError):
        cumulative_hazard(HazardSpec(Family.WEIBULL, 2.0, 1.0), -1.0)
    with pytest.raises(ValueError):
        inverse_cumulative_hazard(HazardSpec(Family.WEIBULL, 2.0, 1.0), -0.1)


def test_dict_round_trip():
    rng = np.random.default_rng(3)
    for _ in range(20):
        spec = random_hazard(rng)
        again = hazard_spec_from_dict(hazard_spec_to_dict(spec))
        assert again == spec
    with pytest.raises(ValueError):
        hazard_spec_from_dict({"family": "weibull", "gamma": 2.0})
    with pytest.raises(ValueError):
        hazard_spec_from_dict({"family": "cauchy", "gamma": 1.0,
                               "alpha": 1.0})
