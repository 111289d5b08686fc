"""Result containers shared by the quantum and classical echo paths."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from .errors import NumericalIntegrityError


def p_up(f_echo) -> np.ndarray:
    """Excited-state population after the echo sequence, (1 - Re F)/2.

    F = 1 is perfect coherence (p = 0); F = 0 means complete loss of
    coherence (p = 1/2).  Values are clamped to [0, 1]; a modulus above
    1 + 1e-6 indicates a broken propagation and raises.
    """
    f = np.asarray(f_echo)
    if np.any(np.abs(f) > 1.0 + 1e-6):
        raise NumericalIntegrityError(
            f"echo amplitude modulus {np.max(np.abs(f)):.12g} exceeds 1 + 1e-6"
        )
    p = 0.5 * (1.0 - np.real(f))
    return np.clip(p, 0.0, 1.0)


@dataclass
class EchoResult:
    """Echo amplitude and excited-state population on a tau grid."""

    tau: np.ndarray
    f_echo: np.ndarray  # complex echo amplitude per tau
    p_up: np.ndarray
    epsilon: float
    n_states: int
    meta: Dict = field(default_factory=dict)

    def __post_init__(self):
        self.tau = np.asarray(self.tau, dtype=float)
        self.f_echo = np.asarray(self.f_echo, dtype=complex)
        self.p_up = np.asarray(self.p_up, dtype=float)
        if self.tau.shape != self.f_echo.shape or self.tau.shape != self.p_up.shape:
            raise ValueError("tau, f_echo and p_up must share one shape")

    @classmethod
    def from_amplitude(cls, tau, f_echo, epsilon, n_states, meta=None):
        return cls(
            tau=tau,
            f_echo=f_echo,
            p_up=p_up(f_echo),
            epsilon=epsilon,
            n_states=n_states,
            meta=meta or {},
        )
