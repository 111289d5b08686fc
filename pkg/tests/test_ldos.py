import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import eigh

from wedge_echo import harmonic_potential
from wedge_echo.errors import ConfigurationError
from wedge_echo.ldos import (
    OMEGA_DOWN_DOWN,
    OMEGA_UP_DOWN,
    OverlapMatrix,
    ldos_profile,
    overlap_matrix,
    perturbative_echo,
    select_omega_convention,
)
from wedge_echo.quantum import Grid2D, discretize, eigenstates
from wedge_echo.quantum.echo import eigenstate_echo_grid
from wedge_echo.quantum.spectrum import _dense_hamiltonian


def test_identity_at_zero_perturbation(mini_system):
    basis = mini_system["basis_dn"]
    # second solve of the same operator: phases and degenerate mixtures
    # may differ, so compare squared moduli
    again = eigenstates(mini_system["h_dn"], mini_system["k"])
    o = overlap_matrix(basis, again)
    np.testing.assert_allclose(np.abs(o.o) ** 2, np.eye(basis.k), atol=1e-8)
    assert np.all(o.truncation_loss < 1e-8)


def test_column_norms_with_margin(mini_system, mini_up):
    o = overlap_matrix(mini_system["basis_dn"], mini_up["basis_up"])
    norms = 1.0 - o.truncation_loss
    occupied = mini_system["basis_dn"].energies < mini_system["e_clip"]
    assert np.all(norms[occupied] > 0.99)
    assert np.all(norms <= 1.0 + 1e-9)


def test_mismatched_grids_rejected(mini_system, units):
    pot = harmonic_potential(1.0, units)
    g = Grid2D(-8.0, 8.0, -8.0, 8.0, nx=32, nz=32)
    other = eigenstates(discretize(pot, g), 5)
    with pytest.raises(ConfigurationError):
        overlap_matrix(mini_system["basis_dn"], other)


def test_overlaps_match_dense_diagonalization(units):
    # small 1D fixture where both manifolds come from dense eigh
    pot_dn = harmonic_potential(0.9, units)
    eps = 0.08

    class Up:
        spec = pot_dn.spec

        def __call__(self, x, z):
            return (1.0 + eps) * pot_dn(x, z)

    g = Grid2D(-7.0, 7.0, 0.0, 1.0, nx=64, nz=1)
    h_dn, h_up = discretize(pot_dn, g), discretize(Up(), g)
    b_dn, b_up = eigenstates(h_dn, 8), eigenstates(h_up, 8)
    o = overlap_matrix(b_dn, b_up)

    da = g.area_element
    vals_d, vecs_d = eigh(_dense_hamiltonian(h_dn))
    vals_u, vecs_u = eigh(_dense_hamiltonian(h_up))
    ref = np.abs(vecs_u[:, :8].T @ vecs_d[:, :8])  # orthonormal in counting norm
    np.testing.assert_allclose(np.abs(o.o) * np.sqrt(da) / np.sqrt(da), np.abs(o.o))
    np.testing.assert_allclose(np.abs(o.o), ref, atol=1e-8)


def test_profile_is_delta_at_zero_perturbation(mini_system):
    basis = mini_system["basis_dn"]
    o = overlap_matrix(basis, basis)
    e_ref = float(np.median(basis.energies))
    prof = ldos_profile(o, e_ref=e_ref, window=5.0, bins=41)
    center = np.argmin(np.abs(prof.offsets))
    assert prof.density[center] == pytest.approx(1.0, abs=1e-9)
    assert prof.density.sum() == pytest.approx(1.0, abs=1e-9)
    assert prof.bandwidth == pytest.approx(prof.offsets[1] - prof.offsets[0], rel=0.51)


def test_profile_mass_bounded(mini_system, mini_up):
    o = overlap_matrix(mini_system["basis_dn"], mini_up["basis_up"])
    prof = ldos_profile(o, e_ref=5.3, window=4.0, bins=61)
    assert prof.total_mass() <= 1.0 + 1e-9
    assert np.all(prof.density >= 0.0)
    assert prof.n_states >= 10


def test_profile_needs_enough_states(mini_system, mini_up):
    o = overlap_matrix(mini_system["basis_dn"], mini_up["basis_up"])
    with pytest.raises(ConfigurationError):
        ldos_profile(o, e_ref=4.0, window=0.05)


def test_perturbative_identity_at_zero(mini_system):
    basis = mini_system["basis_dn"]
    o = overlap_matrix(basis, basis)
    f = perturbative_echo(o, 3, np.array([0.0, 1.0, 2.5]))
    np.testing.assert_allclose(f, 1.0, atol=1e-9)


def test_sum_rule(mini_system, mini_up):
    o = overlap_matrix(mini_system["basis_dn"], mini_up["basis_up"])
    sums = np.sum(np.abs(o.o) ** 2, axis=0)
    np.testing.assert_allclose(1.0 - sums, o.truncation_loss, atol=1e-14)
    assert np.all(sums <= 1.0 + 1e-9)


@given(seed=st.integers(0, 10_000))
@settings(max_examples=25, deadline=None)
def test_phase_invariance(mini_system, mini_up, seed):
    o = overlap_matrix(mini_system["basis_dn"], mini_up["basis_up"])
    rng = np.random.default_rng(seed)
    phases_up = np.exp(1j * rng.uniform(0, 2 * np.pi, o.k_up))
    phases_dn = np.exp(1j * rng.uniform(0, 2 * np.pi, o.k_down))
    rotated = OverlapMatrix(
        o=phases_up[:, None] * o.o * phases_dn[None, :],
        e_down=o.e_down,
        e_up=o.e_up,
    )
    tau = np.array([0.7, 1.9])
    f0 = perturbative_echo(o, 2, tau)
    f1 = perturbative_echo(rotated, 2, tau)
    np.testing.assert_allclose(f0, f1, atol=1e-12)


def test_convention_selection_on_mini(mini_system, mini_up):
    basis_dn = mini_system["basis_dn"]
    o = overlap_matrix(basis_dn, mini_up["basis_up"])
    idx = [1, 3]
    tau = np.linspace(0.0, 6.0, 7)
    f_exact = eigenstate_echo_grid(
        basis_dn.states[idx], basis_dn.energies[idx],
        mini_system["h_dn"], mini_up["h_up"], tau, 1e-3,
    )
    sel = select_omega_convention(o, f_exact, idx, tau)
    assert sel["convention"] in (OMEGA_UP_DOWN, OMEGA_DOWN_DOWN)
    assert sel["deviation"] <= sel["all"][OMEGA_DOWN_DOWN] + 1e-15
    assert sel["deviation"] <= sel["all"][OMEGA_UP_DOWN] + 1e-15
