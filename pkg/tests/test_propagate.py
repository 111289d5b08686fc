import numpy as np
import pytest
from scipy.linalg import expm

from wedge_echo import harmonic_potential
from wedge_echo.classical import _kernels as K
from wedge_echo.quantum import Grid2D, GridWavefunction, discretize, evolve, evolve_array, split_step
from wedge_echo.quantum.spectrum import _dense_hamiltonian


@pytest.fixture(scope="module")
def toy_1d(units):
    """32-point 1D grid with a soft well; dense matrices are exact here."""
    pot = harmonic_potential(0.7, units)
    g = Grid2D(-6.0, 6.0, 0.0, 1.0, nx=32, nz=1)
    h = discretize(pot, g)
    x, _ = g.axes()
    psi = GridWavefunction.normalized(g, np.exp(-((x - 0.8) ** 2))[None, :])
    return g, h, psi


def test_norm_preserved_per_step(toy_1d):
    g, h, psi = toy_1d
    drift = 0.0
    cur = psi
    for _ in range(50):
        nxt = split_step(cur, h, 1e-2)
        drift = max(drift, abs(nxt.norm() - cur.norm()))
        cur = nxt
    assert drift < 1e-13


def test_matches_dense_matrix_exponential(toy_1d):
    g, h, psi = toy_1d
    tau = 1.5
    dt = tau / 2000.0
    ham = _dense_hamiltonian(h)
    u_exact = expm(-1j * ham * tau)
    ref = u_exact @ psi.data.ravel()
    out = evolve(psi, h, tau, dt).data.ravel()
    assert np.max(np.abs(out - ref)) < 1e-6


def test_second_order_convergence(toy_1d):
    g, h, psi = toy_1d
    tau = 1.0
    ham = _dense_hamiltonian(h)
    ref = expm(-1j * ham * tau) @ psi.data.ravel()
    errs = []
    for dt in (tau / 128, tau / 256, tau / 512, tau / 1024):
        out = evolve_array(psi.data, h, tau, dt).ravel()
        errs.append(np.max(np.abs(out - ref)))
    rates = [errs[i] / errs[i + 1] for i in range(len(errs) - 1)]
    for r in rates:
        assert 4.0 / 1.5 < r < 4.0 * 1.5


def test_forward_backward_round_trip(mini_system):
    basis = mini_system["basis_dn"]
    h = mini_system["h_dn"]
    psi = basis.state(3)
    fwd = evolve(psi, h, 2.0, 1e-3)
    back = evolve(fwd, h, 2.0, 1e-3, direction="backward")
    assert abs(psi.inner(back)) > 1.0 - 1e-10


def test_eigenstate_acquires_phase_only(mini_system):
    basis = mini_system["basis_dn"]
    h = mini_system["h_dn"]
    n = 2
    psi = basis.state(n)
    tau = 1.7
    out = evolve(psi, h, tau, 5e-4)
    overlap = psi.inner(out)
    assert abs(abs(overlap) - 1.0) < 1e-6
    expected_phase = -basis.energies[n] * tau
    assert np.angle(overlap * np.exp(-1j * expected_phase)) == pytest.approx(
        0.0, abs=1e-5
    )


def test_wavepacket_follows_classical_motion(units, harmonic_field):
    # Ehrenfest: mean position in the harmonic trap tracks the classical
    # trajectory from the independent classical integrator
    omega = 1.0
    g = Grid2D(-9.0, 9.0, -9.0, 9.0, nx=64, nz=64)
    h = discretize(harmonic_field, g)
    xm, zm = g.meshes()
    x0, z0 = 1.5, -0.5
    psi = GridWavefunction.normalized(
        g, np.exp(-((xm - x0) ** 2 + (zm - z0) ** 2) / (2.0))
    )
    da = g.area_element
    tau = 2.0 * np.pi / omega
    steps = 64
    data = psi.data
    cx, cz, cvx, cvz, t = x0, z0, 0.0, 0.0, 0.0
    for i in range(steps):
        data = evolve_array(data, h, tau / steps, 1e-3)
        cx, cz, cvx, cvz, t = K.harmonic_advance(
            cx, cz, cvx, cvz, t, (i + 1) * tau / steps, 1e-4, omega, units.mass
        )
        dens = np.abs(data) ** 2
        mean_x = float(np.sum(xm * dens) * da)
        mean_z = float(np.sum(zm * dens) * da)
        assert abs(mean_x - cx) < 2.0 * g.dx
        assert abs(mean_z - cz) < 2.0 * g.dz
