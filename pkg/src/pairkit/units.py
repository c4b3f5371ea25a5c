"""Unit conventions and conversions.

Everything inside the toolkit runs on SI units with angular frequency
(rad/s) as the canonical spectral variable.  Wavelengths in nm appear only
at user-facing boundaries (configs, the CLI, time-of-flight mapping) and
are converted exactly once.
"""

from __future__ import annotations

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s
TWO_PI = 2.0 * np.pi


def nm_to_angular_frequency(wavelength_nm):
    """Vacuum wavelength in nm to angular frequency in rad/s."""
    lam = np.asarray(wavelength_nm, dtype=float)
    if np.any(lam <= 0.0):
        raise ValueError("wavelength must be > 0 nm")
    out = TWO_PI * SPEED_OF_LIGHT / (lam * 1e-9)
    return float(out) if np.isscalar(wavelength_nm) else out


def angular_frequency_to_nm(omega):
    """Angular frequency in rad/s to vacuum wavelength in nm."""
    w = np.asarray(omega, dtype=float)
    if np.any(w <= 0.0):
        raise ValueError("angular frequency must be > 0 rad/s")
    out = TWO_PI * SPEED_OF_LIGHT / w * 1e9
    return float(out) if np.isscalar(omega) else out


def pump_fwhm_nm_to_sigma(fwhm_nm: float, center_nm: float) -> float:
    """Spectral amplitude width sigma (rad/s) of a Gaussian pump.

    ``fwhm_nm`` is the intensity FWHM of the pump spectrum, the number a
    spectrometer reports.  For an amplitude envelope exp(-u^2 / (2 sigma^2))
    the intensity is exp(-u^2 / sigma^2), whose FWHM is 2 sigma sqrt(ln 2).
    """
    if fwhm_nm <= 0.0:
        raise ValueError("pump fwhm must be > 0 nm")
    dw = TWO_PI * SPEED_OF_LIGHT * (fwhm_nm * 1e-9) / (center_nm * 1e-9) ** 2
    return dw / (2.0 * np.sqrt(np.log(2.0)))


def bandwidth_nm_at(omega_width: float, center_nm: float) -> float:
    """Width in nm equivalent to an angular-frequency width at a carrier."""
    if omega_width < 0.0:
        raise ValueError("width must be >= 0")
    return omega_width * (center_nm * 1e-9) ** 2 / (TWO_PI * SPEED_OF_LIGHT) * 1e9
