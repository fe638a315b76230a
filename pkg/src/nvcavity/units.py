"""Unit conventions and conversions.

All internal rates and frequencies are angular (rad/s).  User-facing values
are quoted in ordinary frequency units (THz, GHz, MHz) unless a configuration
section sets ``angular = true``, in which case the numbers are taken to be
rad/s already (scaled by the same power of ten).

Wavelengths are metres internally, quoted in nm at the interfaces.
"""

from __future__ import annotations

import math

from scipy.constants import c as SPEED_OF_LIGHT
from scipy.constants import hbar as HBAR
from scipy.constants import k as BOLTZMANN

TWO_PI = 2.0 * math.pi

#: Multipliers for the frequency unit suffixes accepted in configuration files.
FREQUENCY_SCALES = {
    "Hz": 1.0,
    "kHz": 1e3,
    "MHz": 1e6,
    "GHz": 1e9,
    "THz": 1e12,
}


def to_angular(value: float, unit: str = "Hz", angular: bool = False) -> float:
    """Convert a quoted frequency or rate to rad/s.

    Args:
        value: Quoted number.
        unit: One of ``Hz``, ``kHz``, ``MHz``, ``GHz``, ``THz``.
        angular: If True the quoted number is already angular and only the
            decimal scale is applied; otherwise it is multiplied by 2*pi.
    """
    try:
        scale = FREQUENCY_SCALES[unit]
    except KeyError:
        raise ValueError(f"unknown frequency unit {unit!r}") from None
    factor = 1.0 if angular else TWO_PI
    return value * scale * factor


def from_angular(value: float, unit: str = "Hz", angular: bool = False) -> float:
    """Inverse of :func:`to_angular`."""
    try:
        scale = FREQUENCY_SCALES[unit]
    except KeyError:
        raise ValueError(f"unknown frequency unit {unit!r}") from None
    factor = 1.0 if angular else TWO_PI
    return value / (scale * factor)


def wavelength_to_angular(wavelength_m: float) -> float:
    """Angular frequency (rad/s) of light with the given vacuum wavelength."""
    if wavelength_m <= 0.0:
        raise ValueError("wavelength must be positive")
    return TWO_PI * SPEED_OF_LIGHT / wavelength_m


def angular_to_wavelength(omega: float) -> float:
    """Vacuum wavelength (m) for an angular frequency (rad/s)."""
    if omega <= 0.0:
        raise ValueError("angular frequency must be positive")
    return TWO_PI * SPEED_OF_LIGHT / omega
