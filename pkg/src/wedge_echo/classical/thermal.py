"""Thermal phase-space sampling, Boltzmann-weighted and energy-clipped."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError, SamplingError
from ..model import BilliardSpec, PerturbationSpec, build_potential


@dataclass
class ThermalSample:
    """Ensemble of classical states with normalized weights.

    states has shape (n, 4) with columns (x, z, vx, vz).  Rejection
    sampling below E_clip produces uniform weights; they are kept
    explicit so reweighted ensembles can reuse the same machinery.
    """

    states: np.ndarray
    weights: np.ndarray
    temperature: float
    e_clip: float
    seed: int
    spec: BilliardSpec

    @property
    def n(self) -> int:
        return self.states.shape[0]

    def energies(self) -> np.ndarray:
        u = self.spec.units
        x, z, vx, vz = self.states.T
        e = 0.5 * u.mass * (vx**2 + vz**2)
        if self.spec.gravity_on:
            e = e + u.mass * u.gravity * z
        if not self.spec.is_hard:
            field = build_potential(self.spec, PerturbationSpec(0.0), "down")
            e = e + field.v_dipole(x, z)
        return e


def _potential_on(spec: BilliardSpec):
    if spec.is_hard:
        u = spec.units

        def v(x, z):
            if spec.gravity_on:
                return u.mass * u.gravity * np.asarray(z, dtype=float)
            return np.zeros_like(np.asarray(z, dtype=float))

        return v
    field = build_potential(spec, PerturbationSpec(0.0), "down")
    return lambda x, z: field(x, z)


def sample_thermal_classical(
    spec: BilliardSpec,
    temperature: float,
    e_clip: float,
    n: int,
    seed: int,
    max_batches: int = 4000,
) -> ThermalSample:
    """Draw n states from exp(-E/kT) restricted to E < E_clip.

    Deterministic for a given seed.  Raises SamplingError when the
    acceptance rate falls below 1e-4 (geometry/temperature mismatch).
    """
    if temperature <= 0.0:
        raise ConfigurationError("temperature must be positive")
    u = spec.units
    kt = u.k_b * temperature  # k_B = 1 in dimensionless mode
    v_of = _potential_on(spec)
    if e_clip <= 0.0:
        raise ConfigurationError("e_clip must exceed the potential minimum")

    if spec.gravity_on:
        z_cap = e_clip / (u.mass * u.gravity)
    else:
        z_cap = spec.sheet_length
    z_max = min(z_cap, spec.sheet_length * math.cos(spec.alpha))
    x_max = z_max * spec.tan_alpha

    # Reference level for the acceptance weight: potential minimum over
    # a fine grid of the sampling box (exact 0 for hard walls).
    if spec.is_hard:
        v_floor = 0.0
    else:
        zs = np.linspace(1e-4, z_max, 400)
        xs = np.linspace(-x_max, x_max, 401)
        xg, zg = np.meshgrid(xs, zs)
        inside = spec.contains(xg, zg)
        vals = v_of(xg, zg)
        v_floor = float(np.min(vals[inside]))

    sigma_v = math.sqrt(kt / u.mass)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    out = np.empty((n, 4))
    got = 0
    proposed = 0
    batch = max(4 * n, 1024)
    for _ in range(max_batches):
        x = rng.uniform(-x_max, x_max, batch)
        z = rng.uniform(0.0, z_max, batch)
        v = rng.normal(0.0, sigma_v, (batch, 2))
        proposed += batch
        inside = spec.contains(x, z)
        pot = v_of(x, z)
        accept_pos = rng.uniform(0.0, 1.0, batch) < np.exp(
            -np.clip(pot - v_floor, 0.0, None) / kt
        )
        e_tot = pot + 0.5 * u.mass * (v[:, 0] ** 2 + v[:, 1] ** 2)
        keep = inside & accept_pos & (e_tot < e_clip)
        idx = np.nonzero(keep)[0]
        take = min(len(idx), n - got)
        if take:
            sel = idx[:take]
            out[got : got + take, 0] = x[sel]
            out[got : got + take, 1] = z[sel]
            out[got : got + take, 2] = v[sel, 0]
            out[got : got + take, 3] = v[sel, 1]
            got += take
        if got >= n:
            break
        if proposed >= 64 * batch and got / proposed < 1e-4:
            raise SamplingError(
                f"thermal acceptance rate {got / proposed:.2e} below 1e-4"
            )
    if got < n:
        raise SamplingError(
            f"drew only {got}/{n} states after {proposed} proposals"
        )
    weights = np.full(n, 1.0 / n)
    return ThermalSample(
        states=out,
        weights=weights,
        temperature=temperature,
        e_clip=e_clip,
        seed=seed,
        spec=spec,
    )
