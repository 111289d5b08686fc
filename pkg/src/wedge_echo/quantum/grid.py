"""Uniform 2D grids and complex wavefunctions on them.

Grids are periodic (spectral kinetic operator), so point counts are
powers of two and the right/top edge points are excluded.  A degenerate
axis with a single point reduces the machinery to 1D, which the small
oracle fixtures use.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import ConfigurationError, NumericalIntegrityError

BOUNDARY_LEAK_TOL = 1e-8


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid2D:
    x_min: float
    x_max: float
    z_min: float
    z_max: float
    nx: int
    nz: int

    def __post_init__(self):
        if self.x_max <= self.x_min or self.z_max <= self.z_min:
            raise ConfigurationError("grid extents must be increasing")
        if not (_is_pow2(self.nx) and _is_pow2(self.nz)):
            raise ConfigurationError("grid point counts must be powers of two")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.nx

    @property
    def dz(self) -> float:
        return (self.z_max - self.z_min) / self.nz

    @property
    def area_element(self) -> float:
        return self.dx * self.dz

    @property
    def shape(self):
        return (self.nz, self.nx)

    @property
    def size(self) -> int:
        return self.nx * self.nz

    def axes(self):
        x = self.x_min + self.dx * np.arange(self.nx)
        z = self.z_min + self.dz * np.arange(self.nz)
        return x, z

    def meshes(self):
        x, z = self.axes()
        return np.meshgrid(x, z)  # shapes (nz, nx)

    def wavenumbers(self):
        kx = 2.0 * np.pi * np.fft.fftfreq(self.nx, d=self.dx)
        kz = 2.0 * np.pi * np.fft.fftfreq(self.nz, d=self.dz)
        return np.meshgrid(kx, kz)


@dataclass
class GridWavefunction:
    """Complex field on a Grid2D, unit-normalized in the grid measure."""

    grid: Grid2D
    data: np.ndarray
    _norm: Optional[float] = field(default=None, repr=False)

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=complex)
        if self.data.shape != self.grid.shape:
            raise ConfigurationError(
                f"wavefunction shape {self.data.shape} != grid {self.grid.shape}"
            )

    @classmethod
    def normalized(cls, grid: Grid2D, data: np.ndarray) -> "GridWavefunction":
        data = np.asarray(data, dtype=complex)
        nrm = np.sqrt(np.sum(np.abs(data) ** 2) * grid.area_element)
        if nrm == 0.0:
            raise ConfigurationError("cannot normalize a zero field")
        return cls(grid=grid, data=data / nrm)

    def norm(self) -> float:
        return float(
            np.sqrt(np.sum(np.abs(self.data) ** 2) * self.grid.area_element)
        )

    def inner(self, other: "GridWavefunction") -> complex:
        return complex(np.vdot(self.data, other.data) * self.grid.area_element)

    def boundary_leak(self) -> float:
        """Largest edge amplitude relative to the global maximum."""
        a = np.abs(self.data)
        peak = a.max()
        if peak == 0.0:
            return 0.0
        edges = max(a[0, :].max(), a[-1, :].max(), a[:, 0].max(), a[:, -1].max())
        return float(edges / peak)

    def check_localized(self, tol: float = BOUNDARY_LEAK_TOL) -> None:
        leak = self.boundary_leak()
        if leak > tol:
            raise NumericalIntegrityError(
                f"boundary amplitude {leak:.3e} of max exceeds {tol:.1e}; "
                "enlarge the grid or strengthen the confinement"
            )


def boundary_leak_batch(data: np.ndarray) -> float:
    """Worst relative edge amplitude over a (batch, nz, nx) array."""
    a = np.abs(data)
    peak = a.max(axis=(-2, -1))
    peak = np.where(peak == 0.0, 1.0, peak)
    edges = np.maximum.reduce(
        [
            a[..., 0, :].max(axis=-1),
            a[..., -1, :].max(axis=-1),
            a[..., :, 0].max(axis=-1),
            a[..., :, -1].max(axis=-1),
        ]
    )
    return float(np.max(edges / peak))
