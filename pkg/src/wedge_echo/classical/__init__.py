"""Classical wedge-billiard dynamics."""

from .backend import BACKEND_NAME, USE_NUMBA  # noqa: F401
from .trajectory import (  # noqa: F401
    ClassicalState,
    BounceEvent,
    TrajectoryRecord,
    propagate_trajectory,
)
from .thermal import ThermalSample, sample_thermal_classical  # noqa: F401
from .section import (  # noqa: F401
    SOSPointSet,
    microcanonical_states,
    occupancy_coverage,
    poincare_section,
)
from .lyapunov import LyapunovEstimate, lyapunov_exponent, regular_fraction  # noqa: F401
from .stats import BounceStats, bounce_time_stats, mean_bounce_time  # noqa: F401
from .echo import classical_echo, first_encounter_times  # noqa: F401
