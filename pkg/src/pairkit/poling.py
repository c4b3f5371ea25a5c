"""Poling-pattern synthesis and exact phase-matching-function evaluation.

A pattern is a list of crystal segments with orientation +1, -1 or 0.  The
phase-matching function is the segment sum

    phi(omega_s, omega_i) = sum_j s_j (e^{i dk x_{j+1}} - e^{i dk x_j}) / (i dk)

with the dk -> 0 segments replaced by their exact limit s_j (x_{j+1} - x_j);
the only numerical error is floating point.

Smooth nonlinearity profiles are approximated by deleting whole poling
periods: a kept period contributes a +1/-1 half-period pair, a deleted one
stays at the background orientation (+1 on both halves), and a deterministic
error-diffusion quantizer picks which periods to keep so that the local
density of kept domains tracks the target profile.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ._pmf_kernels import pmf_general, pmf_uniform
from .dispersion import DispersionModel, phase_mismatch
from .errors import PatternTruncationWarning
from .grids import FrequencyGrid

# Amplitude of the first spatial Fourier order of an ideal 50% duty-cycle
# square wave.  Applied in the analytic periodic response so that it agrees
# with the exact segment sum near the first QPM resonance.
FIRST_ORDER_QPM_AMPLITUDE = 2.0 / np.pi

PROFILE_SHAPES = ("tophat", "gaussian")


@dataclass(frozen=True)
class NonlinearityProfile:
    """Target magnitude of the effective nonlinearity along the waveguide.

    ``amplitude`` sets the peak value; the synthesized domain density tracks
    ``value(x) / amplitude``.  ``center`` defaults to mid-waveguide.
    """

    shape: str
    amplitude: float = 1.0
    gaussian_fwhm: float | None = None
    center: float | None = None

    def __post_init__(self):
        if self.shape not in PROFILE_SHAPES:
            raise ValueError(f"shape must be one of {PROFILE_SHAPES}, got {self.shape!r}")
        if self.amplitude <= 0.0:
            raise ValueError("profile amplitude must be > 0")
        if self.shape == "gaussian":
            if self.gaussian_fwhm is None or self.gaussian_fwhm <= 0.0:
                raise ValueError("gaussian profile requires gaussian_fwhm > 0")

    def density(self, x, length: float):
        """Kept-domain target density in [0, 1] at positions x on [0, length]."""
        x = np.asarray(x, dtype=float)
        if self.shape == "tophat":
            return np.ones_like(x)
        c = length / 2.0 if self.center is None else self.center
        sigma = self.gaussian_fwhm / (2.0 * np.sqrt(2.0 * np.log(2.0)))
        return np.exp(-0.5 * ((x - c) / sigma) ** 2)


@dataclass(frozen=True)
class PolingPattern:
    """Compiled orientation profile: segment boundaries and signs.

    ``boundaries`` has one more entry than ``signs`` and runs from 0 to the
    pattern length; ``signs`` holds the orientation of each segment.
    """

    boundaries: np.ndarray
    signs: np.ndarray
    length: float
    nominal_period: float

    def __post_init__(self):
        b = np.asarray(self.boundaries, dtype=float)
        s = np.asarray(self.signs, dtype=np.int8)
        if b.ndim != 1 or s.ndim != 1 or b.size != s.size + 1:
            raise ValueError("need len(boundaries) == len(signs) + 1")
        if b[0] != 0.0 or not np.isclose(b[-1], self.length, rtol=1e-12, atol=0.0):
            raise ValueError("boundaries must run from 0 to the pattern length")
        if np.any(np.diff(b) <= 0.0):
            raise ValueError("boundaries must be strictly increasing")
        if not np.all(np.isin(s, (-1, 0, 1))):
            raise ValueError("segment signs must be -1, 0 or +1")
        if self.nominal_period <= 0.0 or self.length < self.nominal_period:
            raise ValueError("need nominal_period > 0 and length >= nominal_period")
        b.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "boundaries", b)
        object.__setattr__(self, "signs", s)

    @property
    def segment_lengths(self) -> np.ndarray:
        return np.diff(self.boundaries)

    def uniform_segment_length(self) -> float | None:
        """Common segment length if all segments share one, else None."""
        lengths = self.segment_lengths
        h = lengths[0]
        if np.allclose(lengths, h, rtol=1e-9, atol=0.0):
            return float(h)
        return None

    def flipped(self) -> "PolingPattern":
        """The pattern with every orientation negated."""
        return PolingPattern(self.boundaries, -self.signs, self.length, self.nominal_period)

    def kept_periods(self) -> np.ndarray:
        """Boolean flag per nominal period: True where the domain was kept.

        Only meaningful for half-period-resolution patterns as produced by
        :func:`synthesize_pattern` (a period is kept when its two halves
        carry opposite signs).
        """
        h = self.uniform_segment_length()
        if h is None or self.signs.size % 2:
            raise ValueError("pattern is not built from whole half-period pairs")
        first = self.signs[0::2].astype(int)
        second = self.signs[1::2].astype(int)
        return first != second


def synthesize_pattern(
    profile: NonlinearityProfile, length: float, period: float
) -> PolingPattern:
    """Compile a nonlinearity profile into a deleted-domain poling pattern.

    The waveguide is divided into whole periods (truncating ``length`` down
    with a warning when not commensurate).  Each period is either kept
    (+1 then -1 half) or deleted (background +1 on both halves); the choice
    is first-order error diffusion of the per-period target density with the
    cumulative error thresholded at 0.5, ties kept.  The quantizer is
    deterministic, so identical inputs give identical patterns.
    """
    if period <= 0.0:
        raise ValueError("period must be > 0")
    if length < period:
        raise ValueError("length must cover at least one period")
    if profile.shape == "gaussian" and profile.gaussian_fwhm > length:
        raise ValueError("gaussian_fwhm exceeds the waveguide length")

    ratio = length / period
    n_periods = int(round(ratio))
    if abs(ratio - n_periods) > 1e-9 * max(ratio, 1.0):
        n_periods = int(np.floor(ratio))
        warnings.warn(
            f"length {length:g} m is not a whole number of periods; "
            f"truncated to {n_periods} x {period:g} m",
            PatternTruncationWarning,
            stacklevel=2,
        )
    length = n_periods * period

    centers = (np.arange(n_periods) + 0.5) * period
    density = profile.density(centers, length)

    keep = np.zeros(n_periods, dtype=bool)
    err = 0.0
    for j in range(n_periods):
        value = err + density[j]
        if value >= 0.5:
            keep[j] = True
            err = value - 1.0
        else:
            err = value

    signs = np.ones(2 * n_periods, dtype=np.int8)
    signs[1::2] = np.where(keep, -1, 1)
    boundaries = np.arange(2 * n_periods + 1, dtype=float) * (period / 2.0)
    boundaries[-1] = length  # kill accumulation error in the last edge
    return PolingPattern(boundaries, signs, length, period)


def pmf_from_pattern(
    pattern: PolingPattern,
    model: DispersionModel,
    grid: FrequencyGrid,
    check_range: bool = True,
) -> np.ndarray:
    """Exact phase-matching amplitude of a pattern on a frequency grid.

    Returns a complex (n_signal, n_idler) matrix in units of length.  The
    integral is evaluated segment by segment with the dk -> 0 limit handled
    analytically, so there is no quadrature error.
    """
    omega_s, omega_i = grid.meshes()
    dk = np.ascontiguousarray(
        phase_mismatch(model, omega_s, omega_i, check_range=check_range), dtype=float
    )
    signs = np.ascontiguousarray(pattern.signs, dtype=np.int8)
    h = pattern.uniform_segment_length()
    if h is not None:
        flat = pmf_uniform(dk.ravel(), h, signs)
    else:
        bounds = np.ascontiguousarray(pattern.boundaries, dtype=float)
        flat = pmf_general(dk.ravel(), bounds, signs)
    return flat.reshape(dk.shape)


def pmf_analytic_periodic(delta_k, length: float):
    """First-order QPM response of an ideal periodic pattern.

    ``delta_k`` is the effective mismatch dk - 2 pi / period.  Returns the
    complex amplitude (2/pi) L sinc(delta_k L / 2) e^{i delta_k L / 2},
    the single-Fourier-order approximation of the exact segment sum.
    """
    if length <= 0.0:
        raise ValueError("length must be > 0")
    x = np.asarray(delta_k, dtype=float) * length / 2.0
    out = FIRST_ORDER_QPM_AMPLITUDE * length * np.sinc(x / np.pi) * np.exp(1j * x)
    return complex(out) if np.isscalar(delta_k) else out


@dataclass(frozen=True)
class SidelobeReport:
    """Peak and sidelobe structure of a |PMF|^2 map along the ridge normal."""

    peak_value: float
    peak_signal: float  # rad/s
    peak_idler: float  # rad/s
    first_sidelobe_ratio_db: float  # -inf when nothing clears the noise floor
    cut_offsets: np.ndarray  # signed distance along the cut, rad/s
    cut_values: np.ndarray


def _ridge_normal(intensity: np.ndarray, grid: FrequencyGrid) -> np.ndarray:
    """Unit vector across the phase-matching ridge.

    The ridge direction is estimated as the major principal axis of the
    intensity's second-moment tensor; the cut runs along the minor axis.
    """
    ws = grid.signal_axis()
    wi = grid.idler_axis()
    w = intensity / intensity.sum()
    ms = float((w.sum(axis=1) * ws).sum())
    mi = float((w.sum(axis=0) * wi).sum())
    ds = ws - ms
    di = wi - mi
    css = float((w * ds[:, None] * ds[:, None]).sum())
    cii = float((w * di[None, :] * di[None, :]).sum())
    csi = float((w * ds[:, None] * di[None, :]).sum())
    cov = np.array([[css, csi], [csi, cii]])
    _, vecs = np.linalg.eigh(cov)
    return vecs[:, 0]  # eigenvector of the smaller variance


def _bilinear_cut(
    intensity: np.ndarray,
    grid: FrequencyGrid,
    origin: tuple[float, float],
    direction: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    ws = grid.signal_axis()
    wi = grid.idler_axis()
    step = 0.5 * min(grid.signal_spacing, grid.idler_spacing)
    # longest ray that can stay inside the grid from any origin
    reach = np.hypot(grid.signal_span, grid.idler_span)
    offsets = np.arange(-int(reach / step), int(reach / step) + 1) * step
    ps = origin[0] + offsets * direction[0]
    pi = origin[1] + offsets * direction[1]
    inside = (ps >= ws[0]) & (ps <= ws[-1]) & (pi >= wi[0]) & (pi <= wi[-1])
    offsets, ps, pi = offsets[inside], ps[inside], pi[inside]
    fs = (ps - ws[0]) / grid.signal_spacing
    fi = (pi - wi[0]) / grid.idler_spacing
    i0 = np.clip(fs.astype(int), 0, grid.n_signal - 2)
    j0 = np.clip(fi.astype(int), 0, grid.n_idler - 2)
    a = fs - i0
    b = fi - j0
    values = (
        intensity[i0, j0] * (1 - a) * (1 - b)
        + intensity[i0 + 1, j0] * a * (1 - b)
        + intensity[i0, j0 + 1] * (1 - a) * b
        + intensity[i0 + 1, j0 + 1] * a * b
    )
    return offsets, values


def sidelobe_report(
    pmf_magnitude_squared: np.ndarray,
    grid: FrequencyGrid,
    noise_floor_db: float = -60.0,
    normal: np.ndarray | None = None,
) -> SidelobeReport:
    """Locate the strongest sidelobe on the cut perpendicular to the ridge.

    Walks outward from the peak of the cut, past the first local minimum on
    each side, and reports the largest subsequent local maximum in dB
    relative to the peak.  When nothing beyond the first minima rises above
    ``noise_floor_db`` the ratio is reported as -inf.  ``normal`` overrides
    the moment-based estimate of the cut direction.
    """
    intensity = np.asarray(pmf_magnitude_squared, dtype=float)
    if intensity.shape != (grid.n_signal, grid.n_idler):
        raise ValueError("intensity shape does not match the grid")
    if np.any(intensity < 0.0):
        raise ValueError("intensity must be nonnegative")
    if not np.any(intensity > 0.0):
        raise ValueError("intensity is identically zero")

    peak_idx = np.unravel_index(int(np.argmax(intensity)), intensity.shape)
    peak_s = grid.signal_axis()[peak_idx[0]]
    peak_i = grid.idler_axis()[peak_idx[1]]
    if normal is None:
        normal = _ridge_normal(intensity, grid)
    else:
        normal = np.asarray(normal, dtype=float)
        normal = normal / np.hypot(*normal)

    offsets, cut = _bilinear_cut(intensity, grid, (peak_s, peak_i), normal)
    k0 = int(np.argmax(cut))
    peak_value = float(cut[k0])
    floor = peak_value * 10.0 ** (noise_floor_db / 10.0)

    interior = slice(1, -1)
    is_max = (cut[interior] >= cut[:-2]) & (cut[interior] >= cut[2:])
    is_min = (cut[interior] <= cut[:-2]) & (cut[interior] <= cut[2:])
    max_idx = np.nonzero(is_max)[0] + 1
    min_idx = np.nonzero(is_min)[0] + 1

    candidates: list[int] = []
    right_minima = min_idx[min_idx > k0]
    if right_minima.size:
        candidates.extend(i for i in max_idx if i > right_minima[0])
    left_minima = min_idx[min_idx < k0]
    if left_minima.size:
        candidates.extend(i for i in max_idx if i < left_minima[-1])
    candidates = [i for i in candidates if cut[i] > floor]

    if candidates:
        ratio_db = 10.0 * np.log10(max(cut[i] for i in candidates) / peak_value)
    else:
        ratio_db = -np.inf

    return SidelobeReport(
        peak_value=float(intensity[peak_idx]),
        peak_signal=float(peak_s),
        peak_idler=float(peak_i),
        first_sidelobe_ratio_db=float(ratio_db),
        cut_offsets=offsets,
        cut_values=cut,
    )
