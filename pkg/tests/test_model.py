import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wedge_echo import (
    BilliardSpec,
    PerturbationSpec,
    build_potential,
    hard_wall_limit,
)
from wedge_echo.errors import ConfigurationError


def test_epsilon_zero_identity(sheet_spec):
    pert = PerturbationSpec(epsilon=0.0)
    v_dn = build_potential(sheet_spec, pert, "down")
    v_up = build_potential(sheet_spec, pert, "up")
    x = np.linspace(-8, 8, 41)
    z = np.linspace(0, 10, 41)
    xg, zg = np.meshgrid(x, z)
    np.testing.assert_array_equal(v_dn(xg, zg), v_up(xg, zg))


def test_far_field_is_pure_gravity(sheet_spec):
    v = build_potential(sheet_spec, PerturbationSpec(0.0), "down")
    # on the axis, many widths away from both sheets
    x, z = 0.0, 8.0
    assert abs(float(v(x, z)) - z) < 1e-10 * sheet_spec.trap_depth


def test_reported_detuning_ratio(sheet_spec):
    # epsilon = 1.52e-2 scales the up dipole by exactly 1.0152
    pert = PerturbationSpec(epsilon=1.52e-2)
    v_dn = build_potential(sheet_spec, pert, "down")
    v_up = build_potential(sheet_spec, pert, "up")
    x = np.linspace(-6, 6, 31)
    z = np.linspace(0.2, 9, 31)
    xg, zg = np.meshgrid(x, z)
    d_dn = v_dn.v_dipole(xg, zg)
    d_up = v_up.v_dipole(xg, zg)
    np.testing.assert_allclose(d_up, 1.0152 * d_dn, rtol=1e-14)


@given(
    eps1=st.floats(1e-4, 0.3),
    eps2=st.floats(1e-4, 0.3),
    x=st.floats(-8.0, 8.0),
    z=st.floats(0.1, 10.0),
)
@settings(max_examples=60, deadline=None)
def test_pointwise_scaling_law(sheet_spec, eps1, eps2, x, z):
    v_dn = build_potential(sheet_spec, PerturbationSpec(0.0), "down")
    d = float(v_dn.v_dipole(x, z))
    if d < 0.1:
        # far from the walls the difference cancels to rounding noise
        return
    up1 = build_potential(sheet_spec, PerturbationSpec(eps1), "up")
    up2 = build_potential(sheet_spec, PerturbationSpec(eps2), "up")
    num = float(up1(x, z)) - float(v_dn(x, z))
    den = float(up2(x, z)) - float(v_dn(x, z))
    assert num / den == pytest.approx(eps1 / eps2, rel=1e-9)


def test_gravity_independence_when_depth_zero(units):
    spec = BilliardSpec(
        alpha=math.radians(52.5),
        wall_model="gaussian_sheet",
        wall_width=1.0,
        trap_depth=1e-300,
        units=units,
    )
    v_dn = build_potential(spec, PerturbationSpec(0.2), "down")
    v_up = build_potential(spec, PerturbationSpec(0.2), "up")
    x = np.linspace(-4, 4, 17)
    z = np.linspace(0, 5, 17)
    xg, zg = np.meshgrid(x, z)
    assert np.max(np.abs(v_up(xg, zg) - v_dn(xg, zg))) < 1e-290


def test_mirror_symmetry(sheet_spec):
    v = build_potential(sheet_spec, PerturbationSpec(0.1), "up")
    x = np.linspace(0.1, 9, 25)
    z = np.linspace(0.1, 9, 25)
    xg, zg = np.meshgrid(x, z)
    np.testing.assert_array_equal(v(xg, zg), v(-xg, zg))


def test_dipole_nonnegative_and_capped(sheet_spec):
    v = build_potential(sheet_spec, PerturbationSpec(0.0), "down")
    x = np.linspace(-12, 12, 101)
    z = np.linspace(-2, 14, 101)
    xg, zg = np.meshgrid(x, z)
    d = v.v_dipole(xg, zg)
    assert np.all(d >= 0.0)
    assert np.all(d <= sheet_spec.trap_depth + 1e-12)


def test_wall_center_plane_at_depth(sheet_spec):
    v = build_potential(sheet_spec, PerturbationSpec(0.0), "down")
    s = 6.0
    x = s * math.sin(sheet_spec.alpha)
    z = s * math.cos(sheet_spec.alpha)
    assert float(v.v_dipole(x, z)) == pytest.approx(sheet_spec.trap_depth, rel=1e-12)


def test_invalid_alpha_rejected(units):
    with pytest.raises(ConfigurationError):
        BilliardSpec(alpha=2.0, units=units)
    with pytest.raises(ConfigurationError):
        BilliardSpec(alpha=-0.1, units=units)


def test_negative_epsilon_flagged():
    with pytest.warns(UserWarning):
        PerturbationSpec(epsilon=-0.01)


def test_epsilon_from_detuning():
    pert = PerturbationSpec.from_detuning(omega_hf=2.0, delta_laser=400.0)
    assert pert.epsilon == pytest.approx(0.005)


def test_hard_wall_limit_projects_geometry(sheet_spec):
    hard = hard_wall_limit(sheet_spec)
    assert hard.is_hard
    assert hard.alpha == sheet_spec.alpha
    assert hard.sheet_length == sheet_spec.sheet_length
    # idempotent
    assert hard_wall_limit(hard) == hard


def test_build_potential_rejects_hard_spec(hard_spec):
    with pytest.raises(ConfigurationError):
        build_potential(hard_spec, PerturbationSpec(0.0), "down")
