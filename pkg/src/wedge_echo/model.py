"""Billiard geometry and the state-dependent trapping potentials.

The wedge sits with its vertex at the origin and opens upward: the two
walls are half-lines at angles +/- alpha from the vertical z axis, and
gravity points along -z.  Each wall is either ideal ("hard") or a
Gaussian light sheet of 1/e^2 radius w and peak height V0; overlapping
sheet contributions are summed and capped at V0 (the trap depth).

The two internal states see the same gravity but dipole potentials that
differ by a scale factor: V_d_up = (1 + epsilon) * V_d_down.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError
from .units import UnitSystem, dimensionless

HARD = "hard"
GAUSSIAN_SHEET = "gaussian_sheet"


@dataclass(frozen=True)
class BilliardSpec:
    """Wedge geometry, wall model and gravity switch.

    alpha        vertex half-angle from the vertical, radians, 0 < alpha < pi/2
    wall_model   "hard" or "gaussian_sheet"
    wall_width   1/e^2 radius w of each light sheet (gaussian mode)
    trap_depth   peak sheet height V0 (gaussian mode); also the cap applied
                 where the two sheets overlap near the vertex
    sheet_length extent of each wall from the vertex; beyond it the wall ends
    gravity_on   include m*g*z in the potential
    units        mechanical constants (mass, g, hbar, k_B)
    """

    alpha: float
    wall_model: str = HARD
    wall_width: float = 0.0
    trap_depth: float = 0.0
    sheet_length: float = 24.0
    gravity_on: bool = True
    units: UnitSystem = dimensionless()

    def __post_init__(self):
        if not (0.0 < self.alpha < 0.5 * math.pi):
            raise ConfigurationError(
                f"vertex half-angle must lie in (0, pi/2), got {self.alpha}"
            )
        if self.wall_model not in (HARD, GAUSSIAN_SHEET):
            raise ConfigurationError(f"unknown wall model {self.wall_model!r}")
        if self.wall_model == GAUSSIAN_SHEET:
            if self.wall_width <= 0.0:
                raise ConfigurationError("gaussian_sheet walls need wall_width > 0")
            if self.trap_depth <= 0.0:
                raise ConfigurationError("gaussian_sheet walls need trap_depth > 0")
        if self.sheet_length <= 0.0:
            raise ConfigurationError("sheet_length must be positive")

    @property
    def is_hard(self) -> bool:
        return self.wall_model == HARD

    # Wall frames.  Inward normals point into the billiard; the tangent
    # u runs from the vertex outward along each wall.
    @property
    def tan_alpha(self) -> float:
        return math.tan(self.alpha)

    def wall_normal(self, side: int) -> np.ndarray:
        """Inward unit normal of the right (side=+1) or left (side=-1) wall."""
        return np.array([-side * math.cos(self.alpha), math.sin(self.alpha)])

    def wall_tangent(self, side: int) -> np.ndarray:
        return np.array([side * math.sin(self.alpha), math.cos(self.alpha)])

    def wall_distances(self, x, z):
        """Signed distances to both wall planes; both >= 0 inside the wedge."""
        c, s = math.cos(self.alpha), math.sin(self.alpha)
        d_right = z * s - x * c
        d_left = z * s + x * c
        return d_right, d_left

    def contains(self, x, z) -> np.ndarray:
        d_r, d_l = self.wall_distances(x, z)
        return (d_r >= 0.0) & (d_l >= 0.0)


@dataclass(frozen=True)
class PerturbationSpec:
    """Relative difference of the dipole potentials seen by the two states."""

    epsilon: float
    omega_hf: Optional[float] = None
    delta_laser: Optional[float] = None
    e_hf: float = 0.0  # internal-energy offset; recorded, never propagated

    def __post_init__(self):
        if self.epsilon < 0.0:
            warnings.warn(
                "negative perturbation strength is outside the modelled regime",
                stacklevel=2,
            )

    @classmethod
    def from_detuning(cls, omega_hf: float, delta_laser: float) -> "PerturbationSpec":
        if delta_laser == 0.0:
            raise ConfigurationError("trap-laser detuning must be nonzero")
        return cls(
            epsilon=omega_hf / delta_laser,
            omega_hf=omega_hf,
            delta_laser=delta_laser,
        )


def _dipole_gaussian(spec: BilliardSpec, x, z):
    """Summed, capped Gaussian sheet potential (dipole part only)."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    c, s = math.cos(spec.alpha), math.sin(spec.alpha)
    w2 = spec.wall_width**2
    total = np.zeros(np.broadcast(x, z).shape)
    for side in (+1, -1):
        d = z * s - side * x * c  # signed distance to this wall plane
        u = side * x * s + z * c  # coordinate along the wall, from the vertex
        # Beyond the sheet span the nearest sheet point is an endpoint.
        u_c = np.clip(u, 0.0, spec.sheet_length)
        r2 = d * d + (u - u_c) ** 2
        total = total + spec.trap_depth * np.exp(-2.0 * r2 / w2)
    return np.minimum(total, spec.trap_depth)


@dataclass(frozen=True)
class PotentialField:
    """Evaluator for one branch of the trapping potential.

    V_branch(x, z) = V_gravity(z) + (1 + epsilon*[branch == up]) * V_dipole(x, z)
    """

    spec: BilliardSpec
    branch: str
    epsilon: float
    dipole: Callable
    kind: str = "wedge"

    @property
    def dipole_scale(self) -> float:
        return 1.0 + (self.epsilon if self.branch == "up" else 0.0)

    def gravity(self, x, z):
        z = np.asarray(z, dtype=float)
        if not self.spec.gravity_on:
            return np.zeros_like(z)
        u = self.spec.units
        return u.mass * u.gravity * z

    def v_dipole(self, x, z):
        return self.dipole_scale * np.asarray(self.dipole(x, z), dtype=float)

    def __call__(self, x, z):
        return self.gravity(x, z) + self.v_dipole(x, z)


def build_potential(
    spec: BilliardSpec, pert: PerturbationSpec, branch: str
) -> PotentialField:
    """Potential field for the requested internal-state branch."""
    if branch not in ("down", "up"):
        raise ConfigurationError(f"branch must be 'down' or 'up', got {branch!r}")
    if spec.is_hard:
        raise ConfigurationError(
            "hard-wall specs have no smooth dipole potential; "
            "use gaussian_sheet walls or the classical hard-wall propagator"
        )
    return PotentialField(
        spec=spec,
        branch=branch,
        epsilon=pert.epsilon,
        dipole=lambda x, z: _dipole_gaussian(spec, x, z),
    )


def hard_wall_limit(spec: BilliardSpec) -> BilliardSpec:
    """Idealized hard-wall wedge with the same vertex, angle and gravity."""
    if spec.is_hard:
        return spec
    return replace(spec, wall_model=HARD, wall_width=0.0, trap_depth=0.0)


def harmonic_potential(
    omega: float, units: UnitSystem = dimensionless()
) -> PotentialField:
    """Separable 2D isotropic harmonic trap; integrable test fixture."""
    m = units.mass

    def dipole(x, z):
        x = np.asarray(x, dtype=float)
        z = np.asarray(z, dtype=float)
        return 0.5 * m * omega**2 * (x * x + z * z)

    fake_spec = BilliardSpec(
        alpha=0.25 * math.pi,
        wall_model=GAUSSIAN_SHEET,
        wall_width=1.0,
        trap_depth=np.inf,
        gravity_on=False,
        units=units,
    )
    return PotentialField(
        spec=fake_spec, branch="down", epsilon=0.0, dipole=dipole, kind="harmonic"
    )
