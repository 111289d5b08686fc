import numpy as np
import pytest

from wedge_echo import PerturbationSpec, build_potential, harmonic_potential
from wedge_echo.errors import ConfigurationError
from wedge_echo.quantum import Grid2D, GridWavefunction, design_grid, discretize, eigenstates


def test_grid_requires_power_of_two():
    with pytest.raises(ConfigurationError):
        Grid2D(0.0, 1.0, 0.0, 1.0, nx=100, nz=64)
    g = Grid2D(0.0, 1.0, 0.0, 1.0, nx=1, nz=64)
    assert g.shape == (64, 1)


def test_grid_geometry():
    g = Grid2D(-2.0, 2.0, 0.0, 1.0, nx=8, nz=4)
    assert g.dx == pytest.approx(0.5)
    assert g.dz == pytest.approx(0.25)
    x, z = g.axes()
    assert x[0] == -2.0 and x[-1] == pytest.approx(1.5)  # periodic: no right edge


def test_plane_wave_is_kinetic_eigenvector(units, harmonic_field):
    g = Grid2D(-4.0, 4.0, 0.0, 1.0, nx=32, nz=1)

    class Zero:
        spec = harmonic_field.spec

        def __call__(self, x, z):
            return np.zeros_like(np.asarray(x, dtype=float))

    h = discretize(Zero(), g)
    kx = 2.0 * np.pi * np.fft.fftfreq(32, d=g.dx)
    x, _ = g.axes()
    for mode in (1, 5, 11):
        psi = np.exp(1j * kx[mode] * x)[None, :]
        out = h.apply(psi)
        expected = 0.5 * kx[mode] ** 2 * psi
        np.testing.assert_allclose(out, expected, atol=1e-12)


def test_hermiticity_on_random_pairs(mini_system):
    h = mini_system["h_dn"]
    rng = np.random.default_rng(17)
    da = h.grid.area_element
    worst = 0.0
    for _ in range(100):
        a = rng.normal(size=h.grid.shape) + 1j * rng.normal(size=h.grid.shape)
        b = rng.normal(size=h.grid.shape) + 1j * rng.normal(size=h.grid.shape)
        lhs = np.vdot(a, h.apply(b)) * da
        rhs = np.conj(np.vdot(b, h.apply(a))) * da
        scale = max(abs(lhs), 1.0)
        worst = max(worst, abs(lhs - rhs) / scale)
    assert worst < 1e-12


def test_harmonic_1d_levels(units):
    pot = harmonic_potential(1.0, units)
    g = Grid2D(-12.0, 12.0, 0.0, 1.0, nx=128, nz=1)
    h = discretize(pot, g)
    basis = eigenstates(h, 10)
    expected = np.arange(10) + 0.5
    np.testing.assert_allclose(basis.energies, expected, rtol=1e-6)


def test_grid_too_small_raises(sheet_spec):
    pot = build_potential(sheet_spec, PerturbationSpec(0.0), "down")
    small = Grid2D(-6.0, 6.0, -1.0, 8.0, nx=64, nz=64)
    with pytest.raises(ConfigurationError):
        discretize(pot, small, e_clip=7.0)


def test_design_grid_contains_allowed_region(sheet_spec):
    grid, conf = design_grid(sheet_spec, 9.0, 128, 128)
    pot = build_potential(sheet_spec, PerturbationSpec(0.0), "down")
    discretize(pot, grid, conf, e_clip=9.0)  # margin check passes


def test_wavefunction_normalization(mini_system):
    g = mini_system["grid"]
    rng = np.random.default_rng(1)
    psi = GridWavefunction.normalized(g, rng.normal(size=g.shape))
    assert psi.norm() == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ConfigurationError):
        GridWavefunction.normalized(g, np.zeros(g.shape))


def test_eigenstate_boundary_localization(mini_system):
    basis = mini_system["basis_dn"]
    occupied = np.nonzero(basis.energies < mini_system["e_clip"])[0]
    for n in (occupied[0], occupied[-1]):
        assert basis.state(int(n)).boundary_leak() < 1e-8
