"""Joint spectral amplitudes, Schmidt decomposition and purity metrics.

The joint spectrum of a pair source is the product of the pump envelope
(energy conservation, a function of omega_s + omega_i) and the
phase-matching function (momentum conservation).  Its Schmidt decomposition

    f(omega_s, omega_i) = sum_n nu_n psi_n(omega_s) phi_n(omega_i)

yields the heralded-state purity P = sum nu^4 and the effective mode count
K = 1/P.  Discrete mode vectors follow grid quadrature conventions: a mode
psi on the signal axis satisfies sum |psi|^2 * d(omega_s) = 1.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import OptimizerBoundaryWarning
from .grids import FrequencyGrid
from .units import nm_to_angular_frequency, pump_fwhm_nm_to_sigma

SCHMIDT_TRUNCATION = 1e-12  # drop singular values below this


@dataclass(frozen=True)
class PumpEnvelope:
    """Gaussian pump spectrum with optional quadratic spectral phase.

    ``fwhm_nm`` is the intensity FWHM.  ``chirp`` multiplies the squared
    detuning from the carrier in the spectral phase, units s^2.  With
    ``normalize`` the sampled envelope is scaled to unit L2 norm on its
    grid; otherwise the on-resonance amplitude is 1.
    """

    center_nm: float
    fwhm_nm: float
    chirp: float = 0.0
    normalize: bool = False

    def __post_init__(self):
        if self.center_nm <= 0.0:
            raise ValueError("pump center must be > 0 nm")
        if self.fwhm_nm <= 0.0:
            raise ValueError("pump fwhm must be > 0 nm")

    @property
    def center_omega(self) -> float:
        return nm_to_angular_frequency(self.center_nm)

    @property
    def sigma_omega(self) -> float:
        return pump_fwhm_nm_to_sigma(self.fwhm_nm, self.center_nm)


def gaussian_pef(pump: PumpEnvelope, grid: FrequencyGrid) -> np.ndarray:
    """Pump-envelope matrix alpha_p(omega_s + omega_i) on a grid.

    Depends on the frequency sum only, so energy-conserving pairs of grid
    points see identical values.
    """
    omega_s, omega_i = grid.meshes()
    u = omega_s + omega_i - pump.center_omega
    sigma = pump.sigma_omega
    envelope = np.exp(-(u * u) / (2.0 * sigma * sigma) + 1j * pump.chirp * u * u)
    if pump.normalize:
        norm = np.sqrt(np.sum(np.abs(envelope) ** 2) * grid.cell_area)
        envelope = envelope / norm
    return envelope


class JointSpectrum:
    """Unit-normalized complex joint spectral amplitude on a grid.

    Normalization convention: sum |f|^2 d(omega_s) d(omega_i) = 1.
    """

    def __init__(self, grid: FrequencyGrid, amplitude: np.ndarray):
        amplitude = np.asarray(amplitude, dtype=complex)
        if amplitude.shape != (grid.n_signal, grid.n_idler):
            raise ValueError("amplitude shape does not match the grid")
        if not np.all(np.isfinite(amplitude)):
            raise ValueError("amplitude contains non-finite entries")
        norm_sq = float(np.sum(np.abs(amplitude) ** 2) * grid.cell_area)
        if norm_sq <= 0.0:
            raise ValueError("no spectral overlap between PEF and PMF")
        if abs(norm_sq - 1.0) > 1e-12:  # keep reloads of normalized data bit-exact
            amplitude = amplitude / np.sqrt(norm_sq)
        else:
            amplitude = amplitude.copy()
        amplitude.setflags(write=False)
        self.grid = grid
        self.amplitude = amplitude

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.amplitude) ** 2) * self.grid.cell_area)

    def intensity(self) -> np.ndarray:
        return np.abs(self.amplitude) ** 2

    def transposed(self) -> "JointSpectrum":
        """Signal and idler axes exchanged."""
        g = self.grid
        swapped = FrequencyGrid(
            signal_center=g.idler_center,
            idler_center=g.signal_center,
            signal_span=g.idler_span,
            idler_span=g.signal_span,
            n_signal=g.n_idler,
            n_idler=g.n_signal,
        )
        return JointSpectrum(swapped, self.amplitude.T)


def compose_jsa(pef: np.ndarray, pmf: np.ndarray, grid: FrequencyGrid) -> JointSpectrum:
    """Elementwise PEF x PMF product, normalized on the common grid."""
    pef = np.asarray(pef)
    pmf = np.asarray(pmf)
    if pef.shape != pmf.shape:
        raise ValueError("PEF and PMF must live on identical grids")
    return JointSpectrum(grid, pef * pmf)


@dataclass(frozen=True)
class SchmidtSpectrum:
    """Schmidt coefficients and discrete mode sets of a joint spectrum.

    ``signal_modes`` and ``idler_modes`` hold one mode per column, sampled
    on ``signal_axis`` / ``idler_axis`` and orthonormal under grid
    quadrature.  Coefficients are nonincreasing with sum nu^2 = 1.
    """

    coefficients: np.ndarray
    signal_modes: np.ndarray
    idler_modes: np.ndarray
    signal_axis: np.ndarray
    idler_axis: np.ndarray

    def __post_init__(self):
        nu = np.asarray(self.coefficients, dtype=float)
        if nu.ndim != 1 or nu.size == 0:
            raise ValueError("coefficients must be a nonempty 1-D array")
        if np.any(nu < 0.0) or np.any(np.diff(nu) > 0.0):
            raise ValueError("coefficients must be nonnegative and nonincreasing")
        if abs(float(np.sum(nu**2)) - 1.0) > 1e-6:
            raise ValueError("coefficients must satisfy sum nu^2 = 1")
        for name in ("signal", "idler"):
            modes = np.asarray(getattr(self, f"{name}_modes"))
            axis = np.asarray(getattr(self, f"{name}_axis"), dtype=float)
            if modes.shape != (axis.size, nu.size):
                raise ValueError(f"{name}_modes must be (n_{name}, n_modes)")

    @property
    def n_modes(self) -> int:
        return self.coefficients.size

    def signal_spacing(self) -> float:
        return float(self.signal_axis[1] - self.signal_axis[0])

    def idler_spacing(self) -> float:
        return float(self.idler_axis[1] - self.idler_axis[0])

    def reconstruct(self) -> np.ndarray:
        """Sum nu_n psi_n phi_n back into a joint-spectrum matrix."""
        scaled = self.signal_modes * self.coefficients[None, :]
        return scaled @ self.idler_modes.T


def schmidt_decompose(
    jsa: JointSpectrum, truncation: float = SCHMIDT_TRUNCATION
) -> SchmidtSpectrum:
    """Singular value decomposition of a joint spectrum.

    Returns coefficients sorted nonincreasing with values below
    ``truncation`` dropped, and mode vectors scaled to quadrature
    orthonormality.
    """
    if not np.all(np.isfinite(jsa.amplitude)):
        raise ValueError("joint spectrum contains non-finite entries")
    ds = jsa.grid.signal_spacing
    di = jsa.grid.idler_spacing
    u, sv, vh = np.linalg.svd(jsa.amplitude * np.sqrt(ds * di), full_matrices=False)
    keep = sv > truncation
    if not np.any(keep):
        keep = np.zeros_like(sv, dtype=bool)
        keep[0] = True
    # Eq. convention f = sum nu psi_n(w_s) phi_n(w_i): the idler modes are
    # the rows of V^H as-is, so the reconstruction is literally U S V^H.
    return SchmidtSpectrum(
        coefficients=sv[keep],
        signal_modes=u[:, keep] / np.sqrt(ds),
        idler_modes=vh[keep, :].T / np.sqrt(di),
        signal_axis=jsa.grid.signal_axis(),
        idler_axis=jsa.grid.idler_axis(),
    )


def purity(spectrum: SchmidtSpectrum) -> float:
    """Heralded single-photon purity P = sum nu^4."""
    return float(np.sum(spectrum.coefficients**4))


def schmidt_number(spectrum: SchmidtSpectrum) -> float:
    """Effective mode count K = 1 / P."""
    return 1.0 / purity(spectrum)


def purity_from_matrix(amplitude: np.ndarray) -> float:
    """Purity of an (unnormalized) amplitude matrix without a full SVD.

    With G = A^H A / tr(A^H A), the purity sum nu^4 equals ||G||_F^2.  One
    matrix product is much cheaper than an SVD on large grids; the result
    is algebraically identical.  Uniform quadrature weights cancel in the
    ratio, so no grid is needed.
    """
    a = np.asarray(amplitude)
    gram = a.conj().T @ a
    trace = float(np.real(np.trace(gram)))
    if trace <= 0.0:
        raise ValueError("amplitude matrix is identically zero")
    return float(np.sum(np.abs(gram) ** 2)) / trace**2


def purity_from_intensity(
    jsi: np.ndarray, grid: FrequencyGrid, mode: str = "sqrt"
) -> float:
    """Purity estimated from a measured joint spectral intensity.

    ``sqrt`` takes the elementwise square root first, recovering amplitude
    magnitudes but discarding all phase (phase correlations, e.g. from pump
    chirp, are invisible and the estimate is optimistic).  ``raw``
    decomposes the intensity itself; it is a known-biased alternative kept
    for comparison.
    """
    jsi = np.asarray(jsi, dtype=float)
    if np.any(jsi < 0.0):
        raise ValueError("intensity must be nonnegative")
    if mode == "sqrt":
        amplitude = np.sqrt(jsi)
    elif mode == "raw":
        amplitude = jsi
    else:
        raise ValueError("mode must be 'sqrt' or 'raw'")
    return purity(schmidt_decompose(JointSpectrum(grid, amplitude)))


def marginals(jsa: JointSpectrum) -> tuple[np.ndarray, np.ndarray]:
    """Signal and idler intensity profiles, each integrating to 1."""
    intensity = jsa.intensity()
    signal = intensity.sum(axis=1) * jsa.grid.idler_spacing
    idler = intensity.sum(axis=0) * jsa.grid.signal_spacing
    return signal, idler


def marginal_overlap(p: np.ndarray, q: np.ndarray, spacing: float) -> float:
    """Bhattacharyya overlap integral of two intensity profiles on one axis."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError("profiles must share one axis")
    return float(np.sum(np.sqrt(p * q)) * spacing)


def golden_section_maximize(f, lo: float, hi: float, rel_tol: float = 1e-3):
    """Golden-section search for the maximum of a unimodal scalar function.

    Shrinks [lo, hi] until its width falls below ``rel_tol`` times the
    midpoint.  Returns (x, f(x), hit_boundary) where ``hit_boundary`` marks
    an endpoint value exceeding the interior optimum.
    """
    if not lo < hi:
        raise ValueError("need lo < hi")
    inv_phi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > rel_tol * 0.5 * (a + b):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    fx = f(x)
    hit_boundary = f(lo) > fx or f(hi) > fx
    if hit_boundary:
        for edge in (lo, hi):
            if f(edge) > fx:
                x, fx = edge, f(edge)
    return x, fx, hit_boundary


@dataclass(frozen=True)
class PumpOptimum:
    fwhm_nm: float
    purity: float
    hit_boundary: bool


def optimize_pump_bandwidth(
    pmf: np.ndarray,
    grid: FrequencyGrid,
    pump_center_nm: float,
    chirp: float = 0.0,
    bracket_nm: tuple[float, float] = (0.2, 6.0),
    rel_tol: float = 1e-3,
) -> PumpOptimum:
    """Pump bandwidth maximizing the heralded purity for a fixed PMF.

    Golden-section search over the intensity FWHM in nm; tolerance is
    relative to the bandwidth itself (default 0.1%).  Falls back to the
    better bracket endpoint, with a warning, when no interior maximum
    exists.
    """
    pmf = np.asarray(pmf)
    if not np.any(pmf != 0.0):
        raise ValueError("PMF is identically zero on the grid")

    def objective(fwhm_nm: float) -> float:
        pump = PumpEnvelope(center_nm=pump_center_nm, fwhm_nm=fwhm_nm, chirp=chirp)
        return purity_from_matrix(gaussian_pef(pump, grid) * pmf)

    fwhm, value, hit_boundary = golden_section_maximize(
        objective, bracket_nm[0], bracket_nm[1], rel_tol=rel_tol
    )
    if hit_boundary:
        warnings.warn(
            f"pump-bandwidth optimum sits on the bracket edge at {fwhm:g} nm",
            OptimizerBoundaryWarning,
            stacklevel=2,
        )
    return PumpOptimum(fwhm_nm=float(fwhm), purity=float(value), hit_boundary=hit_boundary)
