"""Discretized Hamiltonians: spectral kinetic term, diagonal potential.

The kinetic operator acts in the discrete Fourier momentum basis, so
the underlying topology is periodic.  Linear gravity is incompatible
with periodicity unless the amplitude vanishes at the edges; billiard
runs therefore add a steep, state-independent confinement ramp outside
the physical wedge, which also removes would-be states behind the wall
sheets and below the vertex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.fft as _fft

from ..errors import ConfigurationError
from ..model import BilliardSpec, PotentialField
from ..units import UnitSystem
from .grid import Grid2D


@dataclass(frozen=True)
class WedgeConfinement:
    """Quartic ramp added outside the wedge interior and above z_top."""

    spec: BilliardSpec
    z_top: float
    strength: float = 100.0
    width: float = 2.0

    def __call__(self, x, z):
        x = np.asarray(x, dtype=float)
        z = np.asarray(z, dtype=float)
        d_r, d_l = self.spec.wall_distances(x, z)
        r_wall = np.maximum(0.0, -np.minimum(d_r, d_l))
        r_top = np.maximum(0.0, z - self.z_top)
        v = np.minimum(1.0, (r_wall / self.width) ** 4)
        v = v + np.minimum(1.0, (r_top / self.width) ** 4)
        return self.strength * v


class HamiltonianOperator:
    """Applies H = p^2/2m + V(x, z) on grid arrays.

    Also owns the cached split-step phase factors, keyed by time step,
    used by the propagators.
    """

    def __init__(self, grid: Grid2D, v: np.ndarray, units: UnitSystem):
        v = np.asarray(v, dtype=float)
        if v.shape != grid.shape:
            raise ConfigurationError("potential array does not match the grid")
        self.grid = grid
        self.v = v
        self.units = units
        kxm, kzm = grid.wavenumbers()
        self.kinetic = (units.hbar**2 / (2.0 * units.mass)) * (kxm**2 + kzm**2)
        self._phases: dict = {}

    def apply(self, psi: np.ndarray) -> np.ndarray:
        """H psi for a single (nz, nx) array or a (batch, nz, nx) stack."""
        psi_k = _fft.fft2(psi, axes=(-2, -1), workers=1)
        kin = _fft.ifft2(self.kinetic * psi_k, axes=(-2, -1), workers=1)
        return kin + self.v * psi

    def matvec_flat(self, vec: np.ndarray) -> np.ndarray:
        return self.apply(vec.reshape(self.grid.shape)).ravel()

    def phases(self, dt: float):
        """(exp(-i V dt/2), exp(-i T dt), exp(-i V dt)) for Strang steps."""
        key = float(dt)
        if key not in self._phases:
            hbar = self.units.hbar
            exp_v_half = np.exp(-0.5j * self.v * dt / hbar)
            exp_t = np.exp(-1j * self.kinetic * dt / hbar)
            self._phases[key] = (exp_v_half, exp_t, exp_v_half * exp_v_half)
            if len(self._phases) > 8:
                self._phases.pop(next(iter(self._phases)))
        return self._phases[key]

    def expectation(self, psi: np.ndarray) -> float:
        da = self.grid.area_element
        return float(np.real(np.vdot(psi, self.apply(psi))) * da)


def discretize(
    potential: PotentialField,
    grid: Grid2D,
    confinement: Optional[WedgeConfinement] = None,
    e_clip: Optional[float] = None,
) -> HamiltonianOperator:
    """Sample the potential (plus optional confinement) onto the grid.

    When e_clip is given, the classically allowed region {V <= e_clip}
    must clear the grid edges by at least four wall widths, otherwise
    the grid is declared too small.
    """
    xm, zm = grid.meshes()
    v_phys = np.asarray(potential(xm, zm), dtype=float)
    if e_clip is not None:
        # the physically allowed region (inside the wedge, confinement
        # excluded) must clear the edges by four wall widths
        margin = 4.0 * potential.spec.wall_width
        tol = max(grid.dx, grid.dz)
        allowed = (v_phys <= e_clip) & potential.spec.contains(xm, zm)
        if allowed.any():
            x, z = grid.axes()
            idx_z, idx_x = np.nonzero(allowed)
            if (
                x[idx_x.min()] - grid.x_min < margin - tol
                or grid.x_max - x[idx_x.max()] < margin - tol
                or grid.z_max - z[idx_z.max()] < margin - tol
            ):
                raise ConfigurationError(
                    "grid too small: allowed region at e_clip reaches within "
                    "4 wall widths of the grid edge"
                )
    v = v_phys
    if confinement is not None:
        v = v + confinement(xm, zm)
    return HamiltonianOperator(grid=grid, v=v, units=potential.spec.units)


def design_grid(
    spec: BilliardSpec,
    e_max: float,
    nx: int,
    nz: int,
    pad: float = 4.0,
) -> tuple[Grid2D, WedgeConfinement]:
    """Grid and confinement sized for wedge states up to energy e_max."""
    u = spec.units
    if not spec.gravity_on:
        raise ConfigurationError("grid design assumes gravity confines from above")
    z_turn = e_max / (u.mass * u.gravity)
    x_half = z_turn * math.tan(spec.alpha) + pad
    grid = Grid2D(
        x_min=-x_half,
        x_max=x_half,
        z_min=-pad,
        z_max=z_turn + pad,
        nx=nx,
        nz=nz,
    )
    conf = WedgeConfinement(spec=spec, z_top=z_turn + 0.9)
    return grid, conf
