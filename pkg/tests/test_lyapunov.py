import numpy as np
import pytest

from wedge_echo.classical import (
    ClassicalState,
    lyapunov_exponent,
    regular_fraction,
    sample_thermal_classical,
)


def test_harmonic_fixture_is_regular(harmonic_field):
    est = lyapunov_exponent(harmonic_field, ClassicalState(1.0, 0.3, 0.0, 0.8),
                            horizon=1500.0)
    assert est.available
    assert abs(est.rate) < 0.01


def test_chaotic_wedge_positive_exponents(hard_spec):
    samp = sample_thermal_classical(hard_spec, 1.3, 12.0, 40, seed=9)
    rates = []
    for i in range(samp.n):
        est = lyapunov_exponent(hard_spec, ClassicalState(*samp.states[i]), 1200.0)
        if est.available:
            rates.append(est.rate)
    rates = np.array(rates)
    assert np.median(rates) > 0.1
    assert np.mean(rates > 0) >= 0.95


def test_renormalization_interval_independence(hard_spec):
    st = ClassicalState(0.37, 4.2, 0.41, -0.2)
    a = lyapunov_exponent(hard_spec, st, 4000.0, renorm_bounces=10)
    b = lyapunov_exponent(hard_spec, st, 4000.0, renorm_bounces=5)
    assert a.available and b.available
    assert abs(a.rate - b.rate) / a.rate < 0.05


def test_corner_seed_reported_unavailable(hard_spec):
    est = lyapunov_exponent(hard_spec, ClassicalState(0.0, 3.0, 0.0, 0.0), 100.0)
    assert not est.available
    assert est.status == "corner"


def test_regular_fraction_extremes(hard_spec, hard_spec_mixed):
    s_c = sample_thermal_classical(hard_spec, 1.3, 12.0, 60, seed=12)
    s_m = sample_thermal_classical(hard_spec_mixed, 1.3, 12.0, 60, seed=13)
    r_c = regular_fraction(hard_spec, s_c, lambda_threshold=0.1, horizon=1200.0)
    r_m = regular_fraction(hard_spec_mixed, s_m, lambda_threshold=0.1, horizon=1200.0)
    assert r_c["fraction"] < 0.1
    assert r_m["fraction"] > 0.15


def test_harmonic_sample_fully_regular(harmonic_field, hard_spec):
    # positions/momenta drawn near the harmonic minimum
    rng = np.random.default_rng(3)
    states = np.column_stack(
        [rng.normal(0, 0.8, 25), rng.normal(0, 0.8, 25),
         rng.normal(0, 0.8, 25), rng.normal(0, 0.8, 25)]
    )
    n_reg = 0
    for row in states:
        est = lyapunov_exponent(harmonic_field, ClassicalState(*row), 800.0)
        n_reg += est.available and abs(est.rate) < 0.05
    assert n_reg == len(states)
