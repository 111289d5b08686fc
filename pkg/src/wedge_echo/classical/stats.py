"""Inter-bounce interval statistics over thermal ensembles."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError
from ..model import BilliardSpec
from .thermal import ThermalSample
from .trajectory import ClassicalState, propagate_trajectory


@dataclass
class BounceStats:
    """Pooled distribution of intervals between wall encounters."""

    bin_edges: np.ndarray
    mass: np.ndarray  # histogram mass, sums to 1
    mean: float  # estimator of the typical time between wall encounters
    n_intervals: int
    n_failures: int

    @property
    def histogram(self):
        return self.bin_edges, self.mass


def encounter_merge_window(spec: BilliardSpec, energy: float) -> float:
    """Refractory window grouping one arc's wall hits into one encounter.

    In a gravity billiard the wall hits cluster at the bottom of each
    free-fall arc (a left-right pair, or several grazing contacts);
    counting each of them separately would halve the apparent encounter
    period relative to the periodicity the motion actually has.  Half a
    gravity turnaround time, v/g, spans such a burst without bridging
    consecutive arcs.  Without gravity there are no arcs and no merging.
    """
    u = spec.units
    if not spec.gravity_on:
        return 0.0
    v = math.sqrt(2.0 * max(energy, 0.0) / u.mass)
    return 0.5 * v / u.gravity


def merge_encounters(times: np.ndarray, window: float) -> np.ndarray:
    """First hit time of each encounter burst."""
    if len(times) == 0 or window <= 0.0:
        return times
    keep = [times[0]]
    for t in times[1:]:
        if t - keep[-1] > window:
            keep.append(t)
    return np.array(keep)


def bounce_time_stats(
    spec: BilliardSpec,
    sample: ThermalSample,
    horizon: float,
    n_bins: int = 60,
    per_wall: bool = True,
) -> BounceStats:
    """Distribution and mean of intervals between wall encounters.

    Intervals are taken between successive encounters with the *same*
    wall (burst-merged): in the mirror-symmetric wedge the eigenstates
    desymmetrize, so the recurrence that sets the coherence revival is
    the per-wall return period, not the alternating left/right gap.
    The horizon should cover at least ~20 mean intervals per member so
    the pooled estimate is not dominated by censoring.
    """
    if sample.n == 0:
        raise ConfigurationError("sample is empty")
    energies = sample.energies()
    intervals = []
    failures = 0
    for i in range(sample.n):
        st = ClassicalState(*sample.states[i])
        try:
            rec = propagate_trajectory(st, spec, horizon)
        except ConfigurationError:
            failures += 1
            continue
        window = encounter_merge_window(spec, float(energies[i]))
        times = rec.bounce_times
        walls = np.array([e.wall for e in rec.events])
        groups = ((1,), (-1,)) if per_wall else ((1, -1),)
        for grp in groups:
            sel = np.isin(walls, grp) if len(times) else np.array([], bool)
            hits = merge_encounters(times[sel], window)
            if len(hits) >= 2:
                intervals.append(np.diff(hits))
        if rec.status == "corner":
            failures += 1
    if not intervals:
        raise ConfigurationError("no bounce intervals recorded; horizon too short?")
    pooled = np.concatenate(intervals)
    mean = float(pooled.mean())
    if horizon < 20.0 * mean:
        raise ConfigurationError(
            f"horizon {horizon} covers fewer than 20 mean intervals ({mean:.3g})"
        )
    edges = np.linspace(0.0, float(pooled.max()) * (1.0 + 1e-12), n_bins + 1)
    counts, edges = np.histogram(pooled, bins=edges)
    mass = counts / counts.sum()
    return BounceStats(
        bin_edges=edges,
        mass=mass,
        mean=mean,
        n_intervals=len(pooled),
        n_failures=failures,
    )


def mean_bounce_time(
    spec: BilliardSpec, sample: ThermalSample, horizon: float
) -> float:
    """Convenience wrapper returning only the pooled mean interval."""
    return bounce_time_stats(spec, sample, horizon).mean
