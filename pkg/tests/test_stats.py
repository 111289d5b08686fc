import dataclasses
import math

import numpy as np
import pytest

from wedge_echo import BilliardSpec
from wedge_echo.classical import bounce_time_stats, sample_thermal_classical
from wedge_echo.classical.stats import encounter_merge_window, merge_encounters
from wedge_echo.errors import ConfigurationError


def test_histogram_mass_normalized(hard_spec):
    samp = sample_thermal_classical(hard_spec, 1.3, 12.0, 120, seed=8)
    stats = bounce_time_stats(hard_spec, samp, horizon=400.0)
    assert abs(stats.mass.sum() - 1.0) < 1e-12
    assert stats.mean > 0


def test_speed_scaling_halves_intervals(units):
    # pure billiard flights: gravity off, straight segments between walls
    spec = BilliardSpec(alpha=math.radians(52.5), gravity_on=False,
                        sheet_length=12.0, units=units)
    samp = sample_thermal_classical(spec, 1.0, 8.0, 250, seed=14)
    fast = dataclasses.replace(samp)
    fast.states = samp.states.copy()
    fast.states[:, 2:] *= 2.0  # T -> 4T in the kinetic-only ensemble
    slow_stats = bounce_time_stats(spec, samp, horizon=300.0)
    fast_stats = bounce_time_stats(spec, fast, horizon=150.0)
    assert fast_stats.mean == pytest.approx(0.5 * slow_stats.mean, rel=0.02)


def test_horizon_precondition(hard_spec):
    samp = sample_thermal_classical(hard_spec, 1.3, 12.0, 40, seed=15)
    with pytest.raises(ConfigurationError):
        bounce_time_stats(hard_spec, samp, horizon=20.0)


def test_merge_encounters_groups_bursts():
    times = np.array([0.0, 0.1, 0.2, 5.0, 5.05, 9.0])
    merged = merge_encounters(times, window=0.5)
    np.testing.assert_allclose(merged, [0.0, 5.0, 9.0])
    # no merging without a window
    np.testing.assert_allclose(merge_encounters(times, 0.0), times)


def test_merge_window_scaling(hard_spec):
    w1 = encounter_merge_window(hard_spec, 2.0)
    w2 = encounter_merge_window(hard_spec, 8.0)
    assert w2 == pytest.approx(2.0 * w1)
    off = dataclasses.replace(hard_spec, gravity_on=False)
    assert encounter_merge_window(off, 4.0) == 0.0
