"""Echo amplitudes from grid propagation and from two-branch spectra.

The four-segment product applied to a state psi is

    exp(+iH_dn tau) exp(+iH_up tau) exp(-iH_dn tau) exp(-iH_up tau) psi

(rightmost factor first).  For an eigenstate |n> of H_dn this collapses
to the time-correlation form

    F_n(tau) = exp(+i E_n tau) <phi | exp(-iH_dn tau) | phi>,
    phi = exp(-iH_up tau) |n>,

which is what the batched thermal path evaluates.  When both branch
spectra are available and the perturbation is weak enough that the
down states stay inside the computed up manifold, the same quantity
follows from the overlap matrix at fixed cost per tau; the method is
chosen automatically from the measured truncation deficits.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigurationError, CoverageError, NumericalIntegrityError
from ..results import EchoResult, p_up
from .grid import GridWavefunction
from .operator import HamiltonianOperator
from .propagate import check_batch_health, evolve_array
from .spectrum import SpectralBasis

DEFICIT_TOL = 1e-3
WEIGHT_FLOOR = 1e-3  # states lighter than this fraction of the max weight


def echo_amplitude(
    psi: GridWavefunction,
    h_down: HamiltonianOperator,
    h_up: HamiltonianOperator,
    tau: float,
    dt: float,
) -> complex:
    """Four-segment echo amplitude for an arbitrary normalized state."""
    nrm = psi.norm()
    if abs(nrm - 1.0) > 1e-6:
        raise ConfigurationError(f"state norm {nrm} is not 1")
    if tau == 0.0:
        return 1.0 + 0.0j
    data = psi.data
    out = evolve_array(data, h_up, tau, dt, "forward")
    out = evolve_array(out, h_down, tau, dt, "forward")
    out = evolve_array(out, h_up, tau, dt, "backward")
    out = evolve_array(out, h_down, tau, dt, "backward")
    f = complex(np.vdot(data, out) * psi.grid.area_element)
    if abs(f) > 1.0 + 1e-9:
        raise NumericalIntegrityError(f"|F| = {abs(f)} exceeds 1 + 1e-9")
    return f


def echo_amplitude_batch(
    states: np.ndarray,
    h_down: HamiltonianOperator,
    h_up: HamiltonianOperator,
    tau: float,
    dt: float,
) -> np.ndarray:
    """Four-segment echo amplitude for a (K, nz, nx) stack of states."""
    da = h_down.grid.area_element
    out = np.array(states, dtype=complex)
    out = evolve_array(out, h_up, tau, dt, "forward")
    out = evolve_array(out, h_down, tau, dt, "forward")
    out = evolve_array(out, h_up, tau, dt, "backward")
    out = evolve_array(out, h_down, tau, dt, "backward")
    return np.sum(np.conj(states) * out, axis=(-2, -1)) * da


def correlation_echo_amplitude(
    psi: GridWavefunction,
    energy: float,
    h_down: HamiltonianOperator,
    h_up: HamiltonianOperator,
    tau: float,
    dt: float,
) -> complex:
    """Time-correlation form, valid when psi is an H_down eigenstate."""
    hbar = h_down.units.hbar
    phi = evolve_array(psi.data, h_up, tau, dt, "forward")
    phi_later = evolve_array(phi, h_down, tau, dt, "forward")
    corr = complex(np.vdot(phi, phi_later) * psi.grid.area_element)
    return np.exp(1j * energy * tau / hbar) * corr


def eigenstate_echo_grid(
    states: np.ndarray,
    energies: np.ndarray,
    h_down: HamiltonianOperator,
    h_up: HamiltonianOperator,
    tau_grid: np.ndarray,
    dt: float,
    health_every: int = 4,
) -> np.ndarray:
    """F_n(tau) for a stack of H_down eigenstates, shape (K, n_tau).

    The up-branch leg advances incrementally across the tau grid; the
    down-branch leg is re-run per tau (its operator argument changes).
    """
    tau_grid = np.asarray(tau_grid, dtype=float)
    if np.any(np.diff(tau_grid) <= 0) and len(tau_grid) > 1:
        raise ConfigurationError("tau grid must be strictly increasing")
    hbar = h_down.units.hbar
    da = h_down.grid.area_element
    k = states.shape[0]
    f = np.empty((k, len(tau_grid)), dtype=complex)
    phi = np.array(states, dtype=complex)
    tau_prev = 0.0
    for j, tau in enumerate(tau_grid):
        if tau > tau_prev:
            phi = evolve_array(phi, h_up, tau - tau_prev, dt, "forward")
            tau_prev = tau
        if tau == 0.0:
            f[:, j] = 1.0
            continue
        later = evolve_array(phi, h_down, tau, dt, "forward")
        corr = np.sum(np.conj(phi) * later, axis=(-2, -1)) * da
        f[:, j] = np.exp(1j * energies * tau / hbar) * corr
        if j % health_every == 0:
            check_batch_health(phi)
    return f


def _overlap(basis_up: SpectralBasis, basis_down: SpectralBasis) -> np.ndarray:
    if basis_up.grid != basis_down.grid:
        raise ConfigurationError("bases live on different grids")
    da = basis_down.grid.area_element
    return (basis_up.flat().conj() @ basis_down.flat().T) * da


def eigenstate_echo_spectral(
    basis_down: SpectralBasis,
    basis_up: SpectralBasis,
    indices: np.ndarray,
    tau_grid: np.ndarray,
    hbar: float,
) -> tuple[np.ndarray, np.ndarray]:
    """F_n(tau) in the two-manifold representation.

    Returns (F of shape (len(indices), n_tau), per-column deficits).
    Exact up to the weight each state leaks outside the computed up
    manifold, which the deficits quantify.
    """
    o = _overlap(basis_up, basis_down)
    deficits = 1.0 - np.sum(np.abs(o) ** 2, axis=0)
    e_dn = basis_down.energies
    e_up = basis_up.energies
    f = np.empty((len(indices), len(tau_grid)), dtype=complex)
    cols = o[:, indices]
    for j, tau in enumerate(tau_grid):
        d_up = np.exp(-1j * e_up * tau / hbar)
        c = o.conj().T @ (d_up[:, None] * cols)  # <k_dn | phi_n(tau)>
        w = np.exp(-1j * e_dn * tau / hbar)
        corr = np.sum(w[:, None] * np.abs(c) ** 2, axis=0)
        f[:, j] = np.exp(1j * e_dn[indices] * tau / hbar) * corr
    return f, deficits[indices]


def thermal_weights(
    energies: np.ndarray, temperature: float, e_clip: float, k_b: float = 1.0
):
    """Boltzmann weights restricted below the clip, normalized to 1."""
    kt = k_b * temperature
    if kt <= 0.0:
        raise ConfigurationError("temperature must be positive")
    inside = energies < e_clip
    if not inside.any():
        raise ConfigurationError("no basis state below e_clip")
    w = np.where(inside, np.exp(-(energies - energies.min()) / kt), 0.0)
    return w / w.sum()


def _coverage_check(energies, weights, temperature, e_clip, k_b):
    """Estimate thermal weight lost above the top basis state."""
    kt = k_b * temperature
    e_top = energies[-1]
    if e_top >= e_clip:
        return 0.0
    # local level density from the last few spacings
    tail = energies[-min(10, len(energies)) :]
    rho = (len(tail) - 1) / max(tail[-1] - tail[0], 1e-12)
    w_top = np.exp(-(e_top - energies.min()) / kt)
    lost = w_top * rho * kt  # integral of the exponential tail
    total = np.sum(np.exp(-(energies - energies.min()) / kt))
    return float(lost / (total + lost))


def thermal_echo(
    basis_down: SpectralBasis,
    h_down: HamiltonianOperator,
    h_up: HamiltonianOperator,
    temperature: float,
    e_clip: float,
    tau_grid,
    dt: float,
    epsilon: float,
    method: str = "auto",
    basis_up: SpectralBasis | None = None,
) -> EchoResult:
    """Boltzmann-averaged echo signal F(tau) = sum_n w_n F_n(tau).

    method: "grid" forces batched propagation, "spectral" forces the
    two-manifold route (requires basis_up and small deficits), "auto"
    prefers spectral when it is trustworthy.
    """
    tau_grid = np.asarray(tau_grid, dtype=float)
    u = h_down.units
    energies = basis_down.energies
    weights = thermal_weights(energies, temperature, e_clip, u.k_b)

    lost = _coverage_check(energies, weights, temperature, e_clip, u.k_b)
    if lost > 0.01:
        raise CoverageError(
            f"basis truncation loses ~{lost:.1%} of the thermal weight",
            diagnostics={"lost_weight": lost},
        )

    active = np.nonzero(weights >= WEIGHT_FLOOR * weights.max())[0]
    w_act = weights[active]
    w_act = w_act / w_act.sum()

    chosen = method
    deficits = None
    if method in ("auto", "spectral"):
        if basis_up is None:
            if method == "spectral":
                raise ConfigurationError("spectral method needs basis_up")
            chosen = "grid"
        else:
            f_states, deficits = eigenstate_echo_spectral(
                basis_down, basis_up, active, tau_grid, u.hbar
            )
            # the echo-amplitude error is bounded by the occupancy-weighted
            # deficit; individual faint near-clip columns may run higher
            w_deficit = float(np.sum(w_act * deficits))
            ok = w_deficit <= DEFICIT_TOL and float(np.max(deficits)) <= 0.02
            if ok:
                chosen = "spectral"
            elif method == "spectral":
                raise CoverageError(
                    f"weighted up-manifold deficit {w_deficit:.2e} (max "
                    f"{np.max(deficits):.2e}) exceeds the spectral-route gate"
                )
            else:
                chosen = "grid"

    if chosen == "grid":
        f_states = eigenstate_echo_grid(
            basis_down.states[active],
            energies[active],
            h_down,
            h_up,
            tau_grid,
            dt,
        )

    f = (w_act[:, None] * f_states).sum(axis=0)
    meta = {
        "method": chosen,
        "dt": dt,
        "n_active": int(len(active)),
        "lost_weight": lost,
        "temperature": temperature,
        "e_clip": e_clip,
    }
    if deficits is not None:
        meta["max_up_deficit"] = float(np.max(deficits))
        meta["weighted_up_deficit"] = float(np.sum(w_act * deficits))
    return EchoResult(
        tau=tau_grid,
        f_echo=f,
        p_up=p_up(f),
        epsilon=epsilon,
        n_states=int(len(active)),
        meta=meta,
    )


def calibrate_dt(
    psi: GridWavefunction,
    h_down: HamiltonianOperator,
    h_up: HamiltonianOperator,
    tau_ref: float,
    dt0: float | None = None,
    target: float = 1e-6,
    max_halvings: int = 6,
) -> tuple[float, int]:
    """Halve dt until the echo amplitude changes by less than `target`."""
    if dt0 is None:
        dt0 = tau_ref / 4096.0
    dt = dt0
    f_prev = echo_amplitude(psi, h_down, h_up, tau_ref, dt)
    for halvings in range(max_halvings + 1):
        f_next = echo_amplitude(psi, h_down, h_up, tau_ref, 0.5 * dt)
        if abs(f_next - f_prev) < target:
            return dt, halvings
        dt *= 0.5
        f_prev = f_next
    raise NumericalIntegrityError(
        f"echo amplitude did not converge in dt after {max_halvings} halvings"
    )
