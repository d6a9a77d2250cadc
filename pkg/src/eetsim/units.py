"""Energy and time units.

Energies cross the API in wavenumbers (cm^-1). Propagators work with hbar = 1,
so an energy becomes an angular frequency in rad per time unit. A
:class:`TimeScale` carries the conversion factor for the time unit in use:
femtoseconds for physical aggregates, or the dimensionless chain time
tau = (2V/hbar) t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT_CM_PER_FS = 2.99792458e-5
RAD_PER_FS_PER_WAVENUMBER = 2.0 * math.pi * SPEED_OF_LIGHT_CM_PER_FS
HARTREE_IN_WAVENUMBERS = 219474.6313705


def energy_to_angular_frequency(e):
    """Convert wavenumbers (cm^-1) to angular frequency (rad/fs).

    Accepts scalars or arrays; negative energies raise ``ValueError``.
    """
    arr = np.asarray(e, dtype=float)
    if np.any(arr < 0):
        raise ValueError(f"energy must be non-negative, got {e!r}")
    out = arr * RAD_PER_FS_PER_WAVENUMBER
    return float(out) if out.ndim == 0 else out


def angular_frequency_to_energy(w):
    """Inverse of :func:`energy_to_angular_frequency`."""
    arr = np.asarray(w, dtype=float)
    if np.any(arr < 0):
        raise ValueError(f"angular frequency must be non-negative, got {w!r}")
    out = arr / RAD_PER_FS_PER_WAVENUMBER
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class TimeScale:
    """Time unit plus the factor turning cm^-1 into rad per that unit."""

    unit: str
    rad_per_wavenumber: float

    def frequencies(self, energies_cm):
        return np.asarray(energies_cm, dtype=float) * self.rad_per_wavenumber


FEMTOSECONDS = TimeScale("fs", RAD_PER_FS_PER_WAVENUMBER)


def chain_timescale(coupling_cm: float) -> TimeScale:
    """Dimensionless time tau = 2|V| t / hbar for nearest-neighbour coupling V."""
    if coupling_cm == 0:
        raise ValueError("chain time needs a non-zero coupling")
    return TimeScale("tau", 1.0 / (2.0 * abs(coupling_cm)))
