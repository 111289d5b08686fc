import numpy as np
import pytest
from scipy.linalg import expm

from wedge_echo import PerturbationSpec, build_potential, harmonic_potential
from wedge_echo.errors import ConfigurationError, CoverageError, NumericalIntegrityError
from wedge_echo.quantum import (
    Grid2D,
    GridWavefunction,
    calibrate_dt,
    correlation_echo_amplitude,
    discretize,
    echo_amplitude,
    eigenstate_echo_grid,
    eigenstate_echo_spectral,
    eigenstates,
    p_up,
    thermal_echo,
    thermal_weights,
)
from wedge_echo.quantum.spectrum import _dense_hamiltonian


def test_p_up_reference_points():
    assert p_up(1.0 + 0j) == 0.0
    assert p_up(0.0 + 0j) == 0.5  # complete loss of coherence
    assert p_up(-1.0 + 0j) == 1.0
    with pytest.raises(NumericalIntegrityError):
        p_up(1.5 + 0j)


def test_epsilon_zero_echo_is_unity(mini_system):
    basis = mini_system["basis_dn"]
    h = mini_system["h_dn"]
    for n in (0, 5, 11):
        f = echo_amplitude(basis.state(n), h, h, tau=3.0, dt=3e-3)
        assert abs(f - 1.0) < 1e-9


def test_tau_zero_is_exact_unity(mini_system, mini_up):
    basis = mini_system["basis_dn"]
    f = echo_amplitude(basis.state(2), mini_system["h_dn"], mini_up["h_up"],
                       tau=0.0, dt=1e-3)
    assert f == 1.0 + 0.0j
    assert isinstance(f, complex)


def test_norm_drift_over_full_sequence(mini_system, mini_up):
    basis = mini_system["basis_dn"]
    h_dn, h_up = mini_system["h_dn"], mini_up["h_up"]
    from wedge_echo.quantum.propagate import evolve_array

    data = basis.state(4).data
    for h, direction in ((h_up, "forward"), (h_dn, "forward"),
                         (h_up, "backward"), (h_dn, "backward")):
        data = evolve_array(data, h, 2.5, 1.5e-3, direction)
    nrm = np.sqrt(np.sum(np.abs(data) ** 2) * mini_system["grid"].area_element)
    assert abs(nrm - 1.0) < 1e-9


def test_echo_matches_dense_exponential(units):
    # 32-point toy grid: exact operator product from dense exponentials
    pot_dn = harmonic_potential(0.8, units)
    eps = 1e-2

    class Up:
        spec = pot_dn.spec

        def __call__(self, x, z):
            return (1.0 + eps) * pot_dn(x, z)

    g = Grid2D(-6.0, 6.0, 0.0, 1.0, nx=32, nz=1)
    h_dn = discretize(pot_dn, g)
    h_up = discretize(Up(), g)
    basis = eigenstates(h_dn, 6)
    psi = basis.state(1)
    tau = 2.0
    f = echo_amplitude(psi, h_dn, h_up, tau, dt=tau / 4000.0)

    hd = _dense_hamiltonian(h_dn)
    hu = _dense_hamiltonian(h_up)
    u = expm(1j * hd * tau) @ expm(1j * hu * tau) @ expm(-1j * hd * tau) @ expm(
        -1j * hu * tau
    )
    vec = psi.data.ravel()
    f_ref = np.vdot(vec, u @ vec) * g.area_element
    assert abs(f - f_ref) < 1e-6


def test_four_segment_equals_correlation_form(units):
    # needs machine-exact eigenstates, so use the dense toy system
    pot_dn = harmonic_potential(0.8, units)
    eps = 5e-2

    class Up:
        spec = pot_dn.spec

        def __call__(self, x, z):
            return (1.0 + eps) * pot_dn(x, z)

    g = Grid2D(-6.0, 6.0, 0.0, 1.0, nx=32, nz=1)
    h_dn = discretize(pot_dn, g)
    h_up = discretize(Up(), g)
    basis = eigenstates(h_dn, 6)
    n = 3
    tau = 2.0
    # the two forms differ only through the Trotter eigenphase error,
    # which must vanish quadratically with the step
    gaps = []
    for dt in (1e-3, 1.25e-4):
        f4 = echo_amplitude(basis.state(n), h_dn, h_up, tau, dt)
        fc = correlation_echo_amplitude(basis.state(n), basis.energies[n],
                                        h_dn, h_up, tau, dt)
        gaps.append(abs(f4 - fc))
    assert gaps[-1] < 1e-8
    assert gaps[0] / gaps[-1] > 20.0


def test_constant_energy_offset_cancels(mini_system, mini_up):
    # an internal-energy shift on the up branch is a global phase per
    # segment and cancels in the echo product
    basis = mini_system["basis_dn"]
    grid = mini_system["grid"]
    h_up = mini_up["h_up"]
    from wedge_echo.quantum.operator import HamiltonianOperator

    h_shifted = HamiltonianOperator(grid, h_up.v + 7.3, h_up.units)
    f0 = echo_amplitude(basis.state(2), mini_system["h_dn"], h_up, 1.5, 1e-3)
    f1 = echo_amplitude(basis.state(2), mini_system["h_dn"], h_shifted, 1.5, 1e-3)
    assert abs(f0 - f1) < 1e-9


def test_global_phase_invariance(mini_system, mini_up):
    basis = mini_system["basis_dn"]
    psi = basis.state(5)
    rotated = GridWavefunction(grid=psi.grid, data=np.exp(1j * 0.77) * psi.data)
    f0 = echo_amplitude(psi, mini_system["h_dn"], mini_up["h_up"], 1.0, 1e-3)
    f1 = echo_amplitude(rotated, mini_system["h_dn"], mini_up["h_up"], 1.0, 1e-3)
    assert abs(abs(f0) - abs(f1)) < 1e-12
    assert abs(f0 - f1) < 1e-9  # expectation value: phase cancels exactly


def test_spectral_and_grid_routes_agree(mini_system, mini_up):
    basis_dn = mini_system["basis_dn"]
    basis_up = mini_up["basis_up"]
    h_dn, h_up = mini_system["h_dn"], mini_up["h_up"]
    tau_grid = np.array([0.0, 1.0, 2.0, 3.5])
    idx = np.array([0, 2, 6])
    f_spec, deficits = eigenstate_echo_spectral(
        basis_dn, basis_up, idx, tau_grid, 1.0
    )
    assert float(deficits.max()) < 1e-3
    f_grid = eigenstate_echo_grid(
        basis_dn.states[idx], basis_dn.energies[idx], h_dn, h_up, tau_grid, 1e-3
    )
    assert np.max(np.abs(f_spec - f_grid)) < 5e-3
    assert np.max(np.abs(f_spec - f_grid)) / max(1e-9, np.max(np.abs(1 - f_grid))) < 0.2


def test_thermal_weights_properties(mini_system):
    basis = mini_system["basis_dn"]
    w = thermal_weights(basis.energies, 0.8, e_clip=6.5)
    assert w.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.diff(w) <= 1e-15)  # non-increasing in energy
    assert np.all(w[basis.energies >= 6.5] == 0.0)


def test_thermal_echo_zero_temperature_limit(mini_system, mini_up):
    basis = mini_system["basis_dn"]
    h_dn, h_up = mini_system["h_dn"], mini_up["h_up"]
    tau_grid = np.array([0.0, 1.2, 2.4])
    res = thermal_echo(basis, h_dn, h_up, temperature=1e-4, e_clip=6.5,
                       tau_grid=tau_grid, dt=1e-3, epsilon=mini_up["eps"],
                       method="grid")
    f0 = eigenstate_echo_grid(basis.states[:1], basis.energies[:1],
                              h_dn, h_up, tau_grid, 1e-3)[0]
    np.testing.assert_allclose(res.f_echo, f0, atol=1e-12)


def test_thermal_echo_coverage_error(mini_system, mini_up):
    basis = mini_system["basis_dn"]
    with pytest.raises(CoverageError):
        thermal_echo(basis, mini_system["h_dn"], mini_up["h_up"],
                     temperature=5.0, e_clip=30.0,
                     tau_grid=np.array([0.0, 1.0]), dt=1e-3,
                     epsilon=0.1, method="grid")


def test_spectral_method_requires_basis(mini_system, mini_up):
    with pytest.raises(ConfigurationError):
        thermal_echo(mini_system["basis_dn"], mini_system["h_dn"],
                     mini_up["h_up"], 0.8, 6.5, np.array([0.0, 1.0]), 1e-3,
                     epsilon=0.1, method="spectral")


def test_calibrate_dt_converges(mini_system, mini_up):
    basis = mini_system["basis_dn"]
    dt, halvings = calibrate_dt(basis.state(1), mini_system["h_dn"],
                                mini_up["h_up"], tau_ref=2.0)
    assert dt > 0
    assert halvings <= 6
