"""Pulsed pair-source time-tag simulation and coincidence statistics.

The simulator emits per-channel timestamp arrays for a pulsed SPDC chip:
each pulse draws a pair number per source from multimode thermal statistics
(mode weights nu_n^2 from the source's Schmidt spectrum), losses thin the
signal and idler branches independently, and the two signal branches mix on
a beamsplitter of reflectivity R.  Timestamps sit on the pulse lattice
(optionally Gaussian-jittered), which is all the downstream estimators use:
pair-generation probabilities come from same-pulse versus different-pulse
coincidence ratios, so channel losses cancel.

Everything is deterministic for a fixed seed and configuration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .grids import FrequencyGrid
from .jointspectrum import SchmidtSpectrum
from .units import angular_frequency_to_nm

PHOTON_CHANNELS = ("signal_bar", "signal_cross", "idler_top", "idler_bot")
CHANNELS = ("trigger",) + PHOTON_CHANNELS
CHANNEL_IDS = {name: i for i, name in enumerate(CHANNELS)}

MAX_PAIRS_PER_PULSE = 3
TRUNCATION_MASS_LIMIT = 1e-6
MODE_MEAN_CUTOFF = 1e-18


@dataclass(frozen=True)
class PulseTrainConfig:
    """Pulse train, per-source pair probability and channel model.

    ``pair_probability`` is the mean pair number per pulse for each source
    (a scalar applies to all sources).  ``loss_signal`` / ``loss_idler``
    are channel transmissions in (0, 1].  ``reflectivity`` routes the first
    source's signals to the bar output with probability R, the second
    source's with probability 1 - R.
    """

    repetition_rate: float
    n_pulses: int
    pair_probability: float | tuple[float, ...]
    loss_signal: float = 1.0
    loss_idler: float = 1.0
    reflectivity: float = 0.5
    seed: int = 0
    timing_jitter: float = 0.0

    def __post_init__(self):
        if self.repetition_rate <= 0.0:
            raise ValueError("repetition rate must be > 0")
        if self.n_pulses < 1:
            raise ValueError("need at least one pulse")
        for p in self.probabilities(2):
            if not 0.0 < p < 1.0:
                raise ValueError("pair probability must lie in (0, 1)")
        for name in ("loss_signal", "loss_idler"):
            eff = getattr(self, name)
            if not 0.0 < eff <= 1.0:
                raise ValueError(f"{name} must lie in (0, 1]")
        if not 0.0 <= self.reflectivity <= 1.0:
            raise ValueError("reflectivity must lie in [0, 1]")
        if self.timing_jitter < 0.0:
            raise ValueError("timing jitter must be >= 0")

    def probabilities(self, n_sources: int) -> tuple[float, ...]:
        p = self.pair_probability
        if np.isscalar(p):
            return (float(p),) * n_sources
        p = tuple(float(v) for v in p)
        if len(p) < n_sources:
            raise ValueError(f"need {n_sources} pair probabilities, got {len(p)}")
        return p[:n_sources]

    @property
    def duration(self) -> float:
        return self.n_pulses / self.repetition_rate


@dataclass(frozen=True)
class TagStream:
    """Per-channel nondecreasing event timestamps from one acquisition."""

    channels: dict[str, np.ndarray]
    duration: float
    repetition_rate: float

    def __post_init__(self):
        for name in CHANNELS:
            if name not in self.channels:
                raise ValueError(f"missing channel {name!r}")
        for name, times in self.channels.items():
            if times.size and (
                np.any(np.diff(times) < 0.0)
                or times[0] < 0.0
                or times[-1] > self.duration * (1.0 + 1e-12)
            ):
                raise ValueError(f"channel {name!r} timestamps out of order or range")
            times.setflags(write=False)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.channels[name]

    def counts(self) -> dict[str, int]:
        return {name: int(times.size) for name, times in self.channels.items()}


def pair_number_distribution(
    mean_pairs: float, mode_weights: np.ndarray, max_pairs: int = MAX_PAIRS_PER_PULSE
) -> tuple[np.ndarray, float]:
    """Distribution of the total pair number per pulse, truncated.

    Each Schmidt mode n is an independent thermal mode with mean
    ``mean_pairs * nu_n^2``; the total is their convolution, truncated at
    ``max_pairs``.  Returns (probabilities[0..max_pairs], truncated mass).
    """
    weights = np.asarray(mode_weights, dtype=float)
    means = mean_pairs * weights / weights.sum()
    dist = np.zeros(max_pairs + 1)
    dist[0] = 1.0
    for mu in means[means > MODE_MEAN_CUTOFF]:
        single = np.array([mu**m / (1.0 + mu) ** (m + 1) for m in range(max_pairs + 1)])
        new = np.zeros_like(dist)
        for have in range(max_pairs + 1):
            if dist[have] == 0.0:
                continue
            add_max = max_pairs - have
            new[have : have + add_max + 1] += dist[have] * single[: add_max + 1]
        dist = new
    return dist, float(1.0 - dist.sum())


def _draw_pair_counts(
    rng: np.random.Generator, n_pulses: int, dist: np.ndarray
) -> np.ndarray:
    cdf = np.cumsum(dist)
    cdf /= cdf[-1]
    return np.searchsorted(cdf, rng.random(n_pulses), side="right").astype(np.int64)


def _assemble_stream(
    pair_counts: list[np.ndarray], cfg: PulseTrainConfig, rng: np.random.Generator
) -> TagStream:
    """Thin, route and timestamp already-drawn per-pulse pair counts."""
    rate = cfg.repetition_rate
    n_pulses = max(counts.size for counts in pair_counts)
    events: dict[str, list[np.ndarray]] = {name: [] for name in PHOTON_CHANNELS}

    for index, counts in enumerate(pair_counts):
        idler_channel = "idler_top" if index == 0 else "idler_bot"
        bar_probability = cfg.reflectivity if index == 0 else 1.0 - cfg.reflectivity
        pulses = np.repeat(np.nonzero(counts)[0], counts[counts > 0])
        keep_idler = rng.random(pulses.size) < cfg.loss_idler
        events[idler_channel].append(pulses[keep_idler])
        keep_signal = rng.random(pulses.size) < cfg.loss_signal
        surviving = pulses[keep_signal]
        to_bar = rng.random(surviving.size) < bar_probability
        events["signal_bar"].append(surviving[to_bar])
        events["signal_cross"].append(surviving[~to_bar])

    channels: dict[str, np.ndarray] = {
        "trigger": np.arange(n_pulses, dtype=float) / rate
    }
    for name in PHOTON_CHANNELS:
        merged = (
            np.sort(np.concatenate(events[name]), kind="stable")
            if events[name]
            else np.empty(0, dtype=np.int64)
        )
        times = merged.astype(float) / rate
        if cfg.timing_jitter > 0.0 and times.size:
            times = np.sort(times + rng.normal(0.0, cfg.timing_jitter, times.size))
            times = np.clip(times, 0.0, cfg.duration)
        channels[name] = times
    return TagStream(channels=channels, duration=cfg.duration, repetition_rate=rate)


def simulate_tag_stream(cfg: PulseTrainConfig, sources) -> TagStream:
    """Simulate an acquisition for one or two heralded pair sources.

    ``sources`` is a SchmidtSpectrum or a sequence of one or two; the first
    feeds the idler_top channel, the second idler_bot.  Raises DomainError
    when the 3-pairs-per-pulse truncation would discard more than 1e-6 of
    the per-pulse probability mass.
    """
    if isinstance(sources, SchmidtSpectrum):
        sources = (sources,)
    if not 1 <= len(sources) <= 2:
        raise ValueError("expected one or two sources")
    probabilities = cfg.probabilities(len(sources))

    rng = np.random.default_rng(cfg.seed)
    pair_counts = []
    for source, p in zip(sources, probabilities):
        dist, truncated = pair_number_distribution(p, source.coefficients**2)
        if truncated >= TRUNCATION_MASS_LIMIT:
            raise DomainError(
                f"truncating at {MAX_PAIRS_PER_PULSE} pairs/pulse discards "
                f"{truncated:.2e} probability mass; reduce the pair probability"
            )
        pair_counts.append(_draw_pair_counts(rng, cfg.n_pulses, dist))
    return _assemble_stream(pair_counts, cfg, rng)


@dataclass(frozen=True)
class CoincidenceHistogram:
    """Bidirectional histogram of pairwise delays between two channels."""

    bin_width: float
    counts: np.ndarray  # int64, odd length, symmetric around zero delay
    zero_delay_index: int
    channel_a: str = ""
    channel_b: str = ""

    def __post_init__(self):
        if self.bin_width <= 0.0:
            raise ValueError("bin width must be > 0")
        if np.any(self.counts < 0):
            raise ValueError("counts must be nonnegative")

    def delay_axis(self) -> np.ndarray:
        return (np.arange(self.counts.size) - self.zero_delay_index) * self.bin_width


def coincidence_histogram(
    stream: TagStream, channel_a: str, channel_b: str, bin_width: float, window: float
) -> CoincidenceHistogram:
    """Histogram of delays t_b - t_a for all pairs with |t_b - t_a| <= window.

    Callers pairing a pulsed stream should keep ``bin_width`` at or below a
    quarter pulse period so neighboring pulse peaks stay separated.
    """
    if bin_width <= 0.0 or window <= 0.0:
        raise ValueError("bin width and window must be > 0")
    ta = stream[channel_a]
    tb = stream[channel_b]
    n_half = int(round(window / bin_width))
    counts = np.zeros(2 * n_half + 1, dtype=np.int64)
    if ta.size and tb.size:
        lo = np.searchsorted(tb, ta - window, side="left")
        hi = np.searchsorted(tb, ta + window, side="right")
        matches = hi - lo
        total = int(matches.sum())
        if total:
            starts = np.concatenate([[0], np.cumsum(matches)[:-1]])
            flat = (
                np.arange(total)
                - np.repeat(starts, matches)
                + np.repeat(lo, matches)
            )
            delays = tb[flat] - np.repeat(ta, matches)
            bins = np.rint(delays / bin_width).astype(np.int64)
            keep = np.abs(bins) <= n_half
            counts = np.bincount(bins[keep] + n_half, minlength=2 * n_half + 1)
    return CoincidenceHistogram(
        bin_width=bin_width,
        counts=counts.astype(np.int64),
        zero_delay_index=n_half,
        channel_a=channel_a,
        channel_b=channel_b,
    )


@dataclass(frozen=True)
class PspdcEstimate:
    """Pair-probability estimate with its counting standard error."""

    value: float
    stderr: float
    zero_count: int
    side_total: int
    n_side_peaks: int


def _peak_ratio(hist: CoincidenceHistogram, rate: float) -> PspdcEstimate:
    period = 1.0 / rate
    if hist.bin_width > period / 4.0 + 1e-15:
        raise ValueError("bin width must be at most a quarter pulse period")
    stride = period / hist.bin_width
    zero = int(hist.counts[hist.zero_delay_index])
    if zero <= 0:
        raise DomainError("zero-delay peak is empty; cannot form the pulse ratio")
    side = []
    k = 1
    while True:
        offset = int(round(k * stride))
        lo = hist.zero_delay_index - offset
        hi = hist.zero_delay_index + offset
        if lo < 0 or hi >= hist.counts.size:
            break
        side.extend((int(hist.counts[lo]), int(hist.counts[hi])))
        k += 1
    if len(side) < 5:
        raise DomainError(
            f"only {len(side)} side peaks inside the window; need at least 5"
        )
    side_total = int(np.sum(side))
    mean_side = side_total / len(side)
    value = mean_side / zero
    stderr = (
        value * np.sqrt(1.0 / side_total + 1.0 / zero) if side_total else float("inf")
    )
    return PspdcEstimate(
        value=float(value),
        stderr=float(stderr),
        zero_count=zero,
        side_total=side_total,
        n_side_peaks=len(side),
    )


def estimate_pspdc_single(hist: CoincidenceHistogram, rate: float) -> PspdcEstimate:
    """Pair probability of an isolated source from its pulse-peak ratio.

    The mean of the different-pulse peaks divided by the same-pulse peak
    estimates the per-pulse pair probability directly; channel losses
    appear in numerator and denominator alike and cancel.
    """
    return _peak_ratio(hist, rate)


def _invert_coupled(ratio: float, own_reflectivity: float, p_other: float) -> float:
    r = own_reflectivity
    return (ratio * (r + (1.0 - r) * p_other) - (1.0 - r) * p_other) / r


def estimate_pspdc_coupled(
    hist: CoincidenceHistogram,
    rate: float,
    own_reflectivity: float,
    p_other: float,
) -> PspdcEstimate:
    """Pair probability of one source whose signals share a beamsplitter.

    ``own_reflectivity`` is the probability that this source's signal
    reaches the tapped splitter output (R when each source is read out at
    its own dominant port of a symmetric coupler).  The measured ratio

        D = (r P_own + (1-r) P_other) / (r + (1-r) P_other)

    is inverted for P_own given the companion source's ``p_other``.  At
    r = 1 the formula reduces exactly to the single-source estimator.
    """
    if not 0.0 < own_reflectivity <= 1.0:
        raise ValueError("own_reflectivity must lie in (0, 1]")
    if not 0.0 <= p_other < 1.0:
        raise ValueError("p_other must lie in [0, 1)")
    raw = _peak_ratio(hist, rate)
    scale = (own_reflectivity + (1.0 - own_reflectivity) * p_other) / own_reflectivity
    return PspdcEstimate(
        value=_invert_coupled(raw.value, own_reflectivity, p_other),
        stderr=raw.stderr * scale,
        zero_count=raw.zero_count,
        side_total=raw.side_total,
        n_side_peaks=raw.n_side_peaks,
    )


def solve_coupled_ratios(
    ratio_top: float,
    ratio_bot: float,
    reflectivity: float,
    tol: float = 1e-10,
    max_iter: int = 1000,
) -> tuple[float, float]:
    """Invert the two coupled pulse-ratio equations for (p_top, p_bot).

    Fixed-point iteration seeded with the single-source readings (the
    ratios themselves); converges for probabilities below r / (1 - r),
    which is asserted along the way.
    """
    if not 0.0 < reflectivity < 1.0:
        raise ValueError("reflectivity must lie in (0, 1) for a coupled solve")
    r_top = r_bot = reflectivity
    p_top, p_bot = ratio_top, ratio_bot
    previous_step = None
    for _ in range(max_iter):
        new_top = _invert_coupled(ratio_top, r_top, p_bot)
        new_bot = _invert_coupled(ratio_bot, r_bot, new_top)
        for value, r in ((new_top, r_top), (new_bot, r_bot)):
            if not -1.0 < value < r / (1.0 - r):
                raise DomainError(
                    "coupled solve left its convergence region p < r/(1-r)"
                )
        step = max(abs(new_top - p_top), abs(new_bot - p_bot))
        p_top, p_bot = new_top, new_bot
        if step == 0.0:
            return p_top, p_bot
        # geometric-contraction residual estimate: remaining distance to the
        # fixed point is ~ step * lam / (1 - lam)
        if previous_step is not None and step < previous_step:
            lam = step / previous_step
            if step * lam / (1.0 - lam) < tol:
                return p_top, p_bot
        previous_step = step
    raise DomainError(f"coupled solve did not converge in {max_iter} iterations")


def solve_pspdc_pair(
    hist_top: CoincidenceHistogram,
    hist_bot: CoincidenceHistogram,
    rate: float,
    reflectivity: float,
    tol: float = 1e-10,
    max_iter: int = 1000,
) -> tuple[PspdcEstimate, PspdcEstimate]:
    """Jointly recover both sources' pair probabilities at one splitter.

    Each histogram pairs a source's idlers with the splitter output its own
    signals dominantly reach; a lossless symmetric coupler feeds either
    source into its dominant port with the same probability R, so both
    inversions share ``reflectivity``.
    """
    raw_top = _peak_ratio(hist_top, rate)
    raw_bot = _peak_ratio(hist_bot, rate)
    r_top = r_bot = reflectivity
    p_top, p_bot = solve_coupled_ratios(
        raw_top.value, raw_bot.value, reflectivity, tol=tol, max_iter=max_iter
    )

    def _finish(raw: PspdcEstimate, value: float, r: float, p_other: float):
        scale = (r + (1.0 - r) * p_other) / r
        return PspdcEstimate(
            value=value,
            stderr=raw.stderr * scale,
            zero_count=raw.zero_count,
            side_total=raw.side_total,
            n_side_peaks=raw.n_side_peaks,
        )

    return (
        _finish(raw_top, p_top, r_top, p_bot),
        _finish(raw_bot, p_bot, r_bot, p_top),
    )


def tof_map(arrival_delays, dispersion_ns_per_nm: float, reference_nm: float):
    """Map time-of-flight delays (s) through a dispersive fiber to nm."""
    if dispersion_ns_per_nm == 0.0:
        raise DomainError("time-of-flight mapping needs nonzero fiber dispersion")
    delays_ns = np.asarray(arrival_delays, dtype=float) / 1e-9
    out = reference_nm + delays_ns / dispersion_ns_per_nm
    return float(out) if np.isscalar(arrival_delays) else out


def delays_from_wavelengths(wavelengths_nm, dispersion_ns_per_nm: float, reference_nm: float):
    """Inverse of :func:`tof_map`: wavelengths in nm to fiber delays in s."""
    if dispersion_ns_per_nm == 0.0:
        raise DomainError("time-of-flight mapping needs nonzero fiber dispersion")
    lam = np.asarray(wavelengths_nm, dtype=float)
    out = (lam - reference_nm) * dispersion_ns_per_nm * 1e-9
    return float(out) if np.isscalar(wavelengths_nm) else out


def sample_jsi_pairs(
    jsi: np.ndarray, grid: FrequencyGrid, n_samples: int, seed: int = 0
) -> tuple[np.ndarray, np.ndarray]:
    """Draw (signal, idler) wavelength pairs (nm) distributed like a JSI.

    Cells are drawn proportionally to the intensity and positions jittered
    uniformly within each cell, mimicking coincidence events collected by
    time-of-flight spectroscopy.
    """
    weights = np.asarray(jsi, dtype=float).ravel()
    if np.any(weights < 0.0) or weights.sum() <= 0.0:
        raise ValueError("JSI must be nonnegative and not identically zero")
    rng = np.random.default_rng(seed)
    cdf = np.cumsum(weights)
    cdf /= cdf[-1]
    flat = np.searchsorted(cdf, rng.random(n_samples), side="right")
    i, j = np.unravel_index(flat, (grid.n_signal, grid.n_idler))
    omega_s = grid.signal_axis()[i] + (rng.random(n_samples) - 0.5) * grid.signal_spacing
    omega_i = grid.idler_axis()[j] + (rng.random(n_samples) - 0.5) * grid.idler_spacing
    return angular_frequency_to_nm(omega_s), angular_frequency_to_nm(omega_i)


def fourfold_count(stream: TagStream) -> int:
    """Number of pulse slots with events in all four photon channels."""
    rate = stream.repetition_rate
    common: np.ndarray | None = None
    for name in PHOTON_CHANNELS:
        pulses = np.unique(np.rint(stream[name] * rate).astype(np.int64))
        common = pulses if common is None else np.intersect1d(common, pulses)
        if common.size == 0:
            return 0
    return int(common.size)


def normalize_fourfolds(
    fourfold_counts, pspdc_top, pspdc_bot, baseline_fraction: float = 0.25
) -> np.ndarray:
    """Rescale fourfold counts by the drifting pair probabilities.

    Fourfold rates scale with the product of both sources' pair
    probabilities, so each count is divided by ``p_top * p_bot`` at its
    sweep position, and the result rescaled to a far-delay mean of 1
    (taken over ``baseline_fraction`` of the points at each sweep end).
    """
    counts = np.asarray(fourfold_counts, dtype=float)
    p_top = np.asarray(pspdc_top, dtype=float)
    p_bot = np.asarray(pspdc_bot, dtype=float)
    if not counts.shape == p_top.shape == p_bot.shape:
        raise ValueError("counts and probability sweeps must have equal length")
    if np.any(p_top <= 0.0) or np.any(p_bot <= 0.0):
        raise ValueError("pair probabilities must be > 0 everywhere")
    normalized = counts / (p_top * p_bot)
    n_edge = max(1, int(round(baseline_fraction * counts.size)))
    if 2 * n_edge >= counts.size:
        baseline = normalized.mean()
    else:
        baseline = 0.5 * (normalized[:n_edge].mean() + normalized[-n_edge:].mean())
    if baseline <= 0.0:
        raise ValueError("cannot normalize: empty far-delay baseline")
    return normalized / baseline
