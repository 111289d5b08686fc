"""Grid-based quantum dynamics: propagation, spectra, echo amplitudes."""

from .grid import Grid2D, GridWavefunction  # noqa: F401
from .operator import HamiltonianOperator, WedgeConfinement, design_grid, discretize  # noqa: F401
from .propagate import evolve, evolve_array, split_step  # noqa: F401
from .spectrum import SpectralBasis, eigenstates  # noqa: F401
from .echo import (  # noqa: F401
    calibrate_dt,
    correlation_echo_amplitude,
    echo_amplitude,
    echo_amplitude_batch,
    eigenstate_echo_grid,
    eigenstate_echo_spectral,
    thermal_echo,
    thermal_weights,
)
from ..results import EchoResult, p_up  # noqa: F401
