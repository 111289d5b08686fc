"""Classical echo model: survival against wall encounters.

Semiclassically, only trajectories that avoid every wall during the
whole pulse sequence contribute coherently, so the echo amplitude
reduces to the probability of zero wall encounters within the total
propagation span (horizon_factor * tau, default 2*tau).
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import ConfigurationError
from ..model import BilliardSpec
from ..results import EchoResult, p_up
from . import _kernels as K
from .thermal import ThermalSample
from .trajectory import CORNER_TOL, smooth_bounce_threshold, smooth_time_step


def first_encounter_times(
    spec: BilliardSpec, sample: ThermalSample, horizon: float, dt=None
) -> np.ndarray:
    """Time of each member's first wall encounter (inf if none by horizon)."""
    u = spec.units
    sin_a, cos_a = math.sin(spec.alpha), math.cos(spec.alpha)
    g_eff = u.gravity if spec.gravity_on else 0.0
    out_t = np.empty(sample.n)
    out_status = np.empty(sample.n, dtype=np.int64)
    states = np.ascontiguousarray(sample.states)
    if spec.is_hard:
        K.hard_first_hits(
            states, horizon, sin_a, cos_a, g_eff,
            spec.sheet_length, CORNER_TOL, out_t, out_status,
        )
    else:
        energies = sample.energies()
        e_ref = float(np.median(energies))
        if dt is None:
            dt = smooth_time_step(spec, float(energies.max()))
        thr = smooth_bounce_threshold(spec, e_ref)
        K.smooth_first_crossings(
            states, horizon, dt, sin_a, cos_a, spec.wall_width,
            spec.trap_depth, spec.sheet_length, g_eff, u.mass, 1.0, thr,
            out_t, out_status,
        )
    return out_t


def classical_echo(
    spec: BilliardSpec,
    sample: ThermalSample,
    tau_grid,
    horizon_factor: float = 2.0,
) -> EchoResult:
    """Survival-probability echo on a tau grid.

    F_cl(tau) is the weighted probability that a member has not yet
    encountered a wall within horizon_factor * tau; the excited-state
    population follows as (1 - F_cl)/2.
    """
    tau_grid = np.asarray(tau_grid, dtype=float)
    if np.any(tau_grid < 0.0):
        raise ConfigurationError("tau values must be non-negative")
    if sample.n == 0:
        raise ConfigurationError("sample is empty")
    horizon = horizon_factor * float(tau_grid.max(initial=0.0)) + 1e-12
    t_first = first_encounter_times(spec, sample, horizon)
    f = np.empty_like(tau_grid)
    for j, tau in enumerate(tau_grid):
        survived = t_first > horizon_factor * tau
        f[j] = float(np.sum(sample.weights[survived]))
    f = f / np.sum(sample.weights)
    return EchoResult(
        tau=tau_grid,
        f_echo=f.astype(complex),
        p_up=p_up(f),
        epsilon=math.inf,  # strong-perturbation limit: any encounter decoheres
        n_states=sample.n,
        meta={
            "kind": "classical-survival",
            "horizon_factor": horizon_factor,
            "wall_model": spec.wall_model,
            "temperature": sample.temperature,
            "e_clip": sample.e_clip,
            "seed": sample.seed,
        },
    )
