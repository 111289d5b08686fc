"""Echo spectroscopy in gravitational wedge billiards."""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    BilliardSpec,
    PerturbationSpec,
    PotentialField,
    build_potential,
    hard_wall_limit,
    harmonic_potential,
)
from .units import UnitSystem, dimensionless, physical_rb  # noqa: F401
