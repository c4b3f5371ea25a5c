"""Rectangular discretizations of the (omega_s, omega_i) plane."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform rectangular grid over signal and idler angular frequencies.

    Axes span ``center +- span/2`` with both endpoints included, so the
    spacing along an axis with ``n`` points is ``span / (n - 1)``.

    Units: rad/s throughout.
    """

    signal_center: float
    idler_center: float
    signal_span: float
    idler_span: float
    n_signal: int
    n_idler: int

    def __post_init__(self):
        if self.n_signal < 2 or self.n_idler < 2:
            raise ValueError("grids need at least 2 points per axis")
        if self.signal_span <= 0.0 or self.idler_span <= 0.0:
            raise ValueError("grid spans must be strictly positive")
        if self.signal_center <= 0.0 or self.idler_center <= 0.0:
            raise ValueError("grid centers must be positive angular frequencies")

    @property
    def signal_spacing(self) -> float:
        return self.signal_span / (self.n_signal - 1)

    @property
    def idler_spacing(self) -> float:
        return self.idler_span / (self.n_idler - 1)

    @property
    def cell_area(self) -> float:
        """Quadrature weight d(omega_s) * d(omega_i) of one grid cell."""
        return self.signal_spacing * self.idler_spacing

    def signal_axis(self) -> np.ndarray:
        return np.linspace(
            self.signal_center - self.signal_span / 2.0,
            self.signal_center + self.signal_span / 2.0,
            self.n_signal,
        )

    def idler_axis(self) -> np.ndarray:
        return np.linspace(
            self.idler_center - self.idler_span / 2.0,
            self.idler_center + self.idler_span / 2.0,
            self.n_idler,
        )

    def meshes(self) -> tuple[np.ndarray, np.ndarray]:
        """(omega_s, omega_i) meshes with shape (n_signal, n_idler)."""
        return np.meshgrid(self.signal_axis(), self.idler_axis(), indexing="ij")


def grid_points(grid: FrequencyGrid) -> tuple[np.ndarray, np.ndarray]:
    """Ordered signal and idler frequency samples of a grid."""
    return grid.signal_axis(), grid.idler_axis()
