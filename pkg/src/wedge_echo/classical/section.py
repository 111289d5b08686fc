"""Collision-indexed Poincare sections of the wedge billiard.

Section coordinates: tangential and normal speed (v_t, v_n) at impacts
on the right wall, normalized by sqrt(2E/m) so the energetically
allowed region is the upper half of the unit disk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from ..errors import ConfigurationError
from ..model import BilliardSpec
from . import _kernels as K
from .trajectory import CORNER_TOL, STATUS_NAMES, ClassicalState


@dataclass
class SOSPointSet:
    """Per-trajectory section points plus bookkeeping."""

    points: List[np.ndarray]  # each (n_i, 2): columns (v_t, v_n)
    energy: float
    spec: BilliardSpec
    statuses: List[str] = field(default_factory=list)

    def stacked(self) -> np.ndarray:
        nonempty = [p for p in self.points if len(p)]
        if not nonempty:
            return np.empty((0, 2))
        return np.vstack(nonempty)


def _section_points_hard(
    spec: BilliardSpec, state: ClassicalState, n_bounces: int
) -> tuple[np.ndarray, str]:
    """Collect right-wall impact coordinates over n_bounces wall events."""
    sin_a, cos_a = math.sin(spec.alpha), math.cos(spec.alpha)
    u = spec.units
    g_eff = u.gravity if spec.gravity_on else 0.0
    e = state.energy(spec)
    v_norm = math.sqrt(2.0 * e / u.mass)

    cap = 65536
    ev_t = np.empty(cap)
    ev_side = np.empty(cap, dtype=np.int64)
    ev_data = np.empty((cap, 7))
    x, z, vx, vz, t = state.x, state.z, state.vx, state.vz, 0.0
    pts = []
    total = 0
    status = K.STATUS_OK
    # Advance in long time chunks until enough bounces are on record.
    chunk = 1e9
    while total < n_bounces:
        n, status, x, z, vx, vz, t = K.hard_advance(
            x, z, vx, vz, t, t + chunk, sin_a, cos_a, g_eff,
            spec.sheet_length, CORNER_TOL, ev_t, ev_side, ev_data, 0,
        )
        take = min(n, n_bounces - total)
        right = ev_side[:take] == 1
        vin = ev_data[:take][right]
        v_t = (vin[:, 2] * sin_a + vin[:, 3] * cos_a) / v_norm
        v_n = (vin[:, 2] * cos_a - vin[:, 3] * sin_a) / v_norm
        pts.append(np.column_stack([v_t, v_n]))
        total += take
        if status in (K.STATUS_CORNER, K.STATUS_ESCAPE):
            break
        if status == K.STATUS_OK and n == 0:
            break  # no gravity pull-back: no further wall events
        # STATUS_BUFFER_FULL continues from the returned state
    out = np.vstack(pts) if pts else np.empty((0, 2))
    return out, STATUS_NAMES.get(status, "ok")


def poincare_section(
    spec: BilliardSpec,
    initials: Sequence[ClassicalState],
    n_bounces: int,
    energy_tol: float = 1e-9,
) -> SOSPointSet:
    """Right-wall collision section for a batch of same-energy trajectories.

    Per-trajectory failures (corner hits, escapes) end that member's
    point list early without aborting the batch.
    """
    if not spec.is_hard:
        raise ConfigurationError("sections are taken in hard-wall mode")
    if not initials:
        raise ConfigurationError("need at least one initial state")
    energies = np.array([s.energy(spec) for s in initials])
    e0 = energies[0]
    if np.any(np.abs(energies - e0) > energy_tol * max(abs(e0), 1.0)):
        raise ConfigurationError("section requires a common energy")

    points, statuses = [], []
    for st in initials:
        pts, status = _section_points_hard(spec, st, n_bounces)
        points.append(pts)
        statuses.append(status)
    return SOSPointSet(points=points, energy=e0, spec=spec, statuses=statuses)


def occupancy_coverage(
    point_sets: Sequence[np.ndarray], probe: np.ndarray, bins: int = 64
) -> float:
    """Fraction of the union's occupied section cells visited by `probe`.

    Cells are a bins x bins grid over (v_t, v_n) in [-1, 1] x [0, 1].
    """
    edges_t = np.linspace(-1.0, 1.0, bins + 1)
    edges_n = np.linspace(0.0, 1.0, bins + 1)
    union = np.zeros((bins, bins), dtype=bool)
    for pts in point_sets:
        if len(pts) == 0:
            continue
        h, _, _ = np.histogram2d(pts[:, 0], pts[:, 1], bins=[edges_t, edges_n])
        union |= h > 0
    hp, _, _ = np.histogram2d(probe[:, 0], probe[:, 1], bins=[edges_t, edges_n])
    occupied = union.sum()
    if occupied == 0:
        return 0.0
    return float(((hp > 0) & union).sum() / occupied)


def microcanonical_states(
    spec: BilliardSpec, energy: float, n: int, seed: int
) -> List[ClassicalState]:
    """Random in-wedge states at a fixed total energy (for sections)."""
    u = spec.units
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    z_max = energy / (u.mass * u.gravity) if spec.gravity_on else spec.sheet_length
    out: List[ClassicalState] = []
    while len(out) < n:
        z = rng.uniform(0.05 * z_max, 0.95 * z_max)
        x = rng.uniform(-z * spec.tan_alpha, z * spec.tan_alpha)
        e_kin = energy - (u.mass * u.gravity * z if spec.gravity_on else 0.0)
        if e_kin <= 0:
            continue
        speed = math.sqrt(2.0 * e_kin / u.mass)
        theta = rng.uniform(0.0, 2.0 * math.pi)
        out.append(
            ClassicalState(x, z, speed * math.cos(theta), speed * math.sin(theta))
        )
    return out
