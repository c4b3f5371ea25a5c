"""Parametric waveguide dispersion and phase-mismatch evaluation.

Each of the three tones (pump, signal, idler) carries an independent
third-order Taylor expansion of its propagation constant around a reference
frequency:

    k(omega) = k0 + k1 d + (k2 / 2) d^2 + (k3 / 6) d^3,   d = omega - omega0

Units: omega0 in rad/s, k0 in 1/m, k1 in s/m, k2 in s^2/m, k3 in s^3/m.
Signal and idler branches may differ (Type 2 processes mix polarizations).

A branch may declare a validity ``span``; evaluation beyond it is Taylor
extrapolation with no physical backing, so frequencies up to a tolerance
factor outside raise a warning and anything further a hard error.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DispersionRangeWarning, DomainError
from .units import TWO_PI

RANGE_TOLERANCE_FACTOR = 2.0  # warn inside span*factor, error beyond


@dataclass(frozen=True)
class DispersionBranch:
    """Taylor model of one tone's propagation constant."""

    omega0: float
    k0: float
    k1: float
    k2: float = 0.0
    k3: float = 0.0
    span: float | None = None  # half-width of the trusted range, rad/s

    def __post_init__(self):
        if self.omega0 <= 0.0:
            raise ValueError("reference frequency omega0 must be > 0")
        if self.span is not None and self.span <= 0.0:
            raise ValueError("declared span must be > 0")

    def wavenumber(self, omega):
        """Evaluate k(omega) in 1/m; omega scalar or array in rad/s."""
        d = np.asarray(omega, dtype=float) - self.omega0
        out = self.k0 + d * (self.k1 + d * (self.k2 / 2.0 + d * (self.k3 / 6.0)))
        return float(out) if np.isscalar(omega) else out

    def check_range(self, omega, name: str, tolerance_factor: float = RANGE_TOLERANCE_FACTOR):
        if self.span is None:
            return
        dev = float(np.max(np.abs(np.asarray(omega, dtype=float) - self.omega0)))
        if dev > tolerance_factor * self.span:
            raise DomainError(
                f"{name} branch evaluated {dev:.3e} rad/s from its reference, "
                f"beyond {tolerance_factor:g}x the declared span {self.span:.3e}"
            )
        if dev > self.span:
            warnings.warn(
                f"{name} branch extrapolated {dev:.3e} rad/s from its reference "
                f"(declared span {self.span:.3e})",
                DispersionRangeWarning,
                stacklevel=3,
            )


@dataclass(frozen=True)
class DispersionModel:
    """Pump, signal and idler branches of one waveguide."""

    pump: DispersionBranch
    signal: DispersionBranch
    idler: DispersionBranch


def phase_mismatch(model: DispersionModel, omega_s, omega_i, check_range: bool = True):
    """Collinear mismatch k_p(omega_s + omega_i) - k_s(omega_s) - k_i(omega_i).

    Returns 1/m; accepts scalars or broadcastable arrays.
    """
    if check_range:
        model.signal.check_range(omega_s, "signal")
        model.idler.check_range(omega_i, "idler")
        model.pump.check_range(np.asarray(omega_s) + np.asarray(omega_i), "pump")
    return (
        model.pump.wavenumber(np.asarray(omega_s) + np.asarray(omega_i))
        - model.signal.wavenumber(omega_s)
        - model.idler.wavenumber(omega_i)
    )


def first_order_qpm_period(model: DispersionModel, omega_s: float, omega_i: float) -> float:
    """Poling period that cancels the mismatch at one point to first order."""
    dk = float(phase_mismatch(model, omega_s, omega_i, check_range=False))
    if dk == 0.0:
        raise DomainError("phase mismatch vanishes; no finite poling period needed")
    return TWO_PI / abs(dk)
