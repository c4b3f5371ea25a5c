"""End-to-end pipelines shared by the CLI and the acceptance suite."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io
from .config import RunConfig
from .counting import (
    TagStream,
    coincidence_histogram,
    delays_from_wavelengths,
    sample_jsi_pairs,
    simulate_tag_stream,
    solve_pspdc_pair,
    estimate_pspdc_single,
    tof_map,
)
from .dispersion import DispersionModel
from .grids import FrequencyGrid
from .interference import g2_purity, hom_dip_trace, visibility_vs_reflectivity
from .jointspectrum import (
    JointSpectrum,
    PumpEnvelope,
    SchmidtSpectrum,
    compose_jsa,
    gaussian_pef,
    marginal_overlap,
    marginals,
    optimize_pump_bandwidth,
    purity,
    schmidt_decompose,
    schmidt_number,
)
from .poling import PolingPattern, pmf_from_pattern, sidelobe_report, synthesize_pattern
from .units import angular_frequency_to_nm


@dataclass(frozen=True)
class SourceBundle:
    """One waveguide source compiled from a run configuration."""

    name: str
    model: DispersionModel
    pattern: PolingPattern
    grid: FrequencyGrid


def build_source(cfg: RunConfig, name: str) -> SourceBundle:
    profile, length, period = cfg.poling(name)
    return SourceBundle(
        name=name,
        model=cfg.dispersion_model(name),
        pattern=synthesize_pattern(profile, length, period),
        grid=cfg.grid_for(name),
    )


def source_pmf(source: SourceBundle) -> np.ndarray:
    return pmf_from_pattern(source.pattern, source.model, source.grid)


def source_jsa(source: SourceBundle, pump: PumpEnvelope) -> JointSpectrum:
    pef = gaussian_pef(pump, source.grid)
    return compose_jsa(pef, source_pmf(source), source.grid)


def source_schmidt(cfg: RunConfig, name: str, pump_name: str) -> SchmidtSpectrum:
    source = build_source(cfg, name)
    return schmidt_decompose(source_jsa(source, cfg.pump(pump_name)))


def ideal_source(grid: FrequencyGrid, fwhm_scale: float = 0.1) -> SchmidtSpectrum:
    """Rank-1 source with a Gaussian signal mode on a grid's signal axis.

    Serves as the pure, perfectly separable reference for reflectivity
    sweeps; the idler mode is an identical Gaussian on the idler axis.
    """
    def _mode(axis):
        sigma = fwhm_scale * (axis[-1] - axis[0]) / 2.355
        mode = np.exp(-0.5 * ((axis - axis.mean()) / sigma) ** 2)
        mode /= np.sqrt(np.sum(np.abs(mode) ** 2) * (axis[1] - axis[0]))
        return mode[:, None]

    return SchmidtSpectrum(
        coefficients=np.array([1.0]),
        signal_modes=_mode(grid.signal_axis()),
        idler_modes=_mode(grid.idler_axis()),
        signal_axis=grid.signal_axis(),
        idler_axis=grid.idler_axis(),
    )


# ---------------------------------------------------------------------------
# subcommand bodies: each returns (summary line, written paths)


def run_pmf(cfg: RunConfig, source_name: str, outdir: Path, fmt: str, header):
    source = build_source(cfg, source_name)
    pmf = source_pmf(source)
    intensity = np.abs(pmf) ** 2
    report = sidelobe_report(intensity, source.grid)
    jsa_like = JointSpectrum(source.grid, pmf)
    path = outdir / f"pmf_{source_name}.{fmt}"
    if fmt == "json":
        io.write_jsa_json(
            path,
            jsa_like,
            metadata={"kind": "pmf", "source": source_name, "header": list(header)},
        )
    else:
        io.write_jsa_csv(path, jsa_like, header_lines=header)
    summary = (
        f"pmf source={source_name} peak_signal_nm="
        f"{angular_frequency_to_nm(report.peak_signal):.3f} "
        f"first_sidelobe_db={report.first_sidelobe_ratio_db:.2f}"
    )
    return summary, [path]


def run_jsa(cfg: RunConfig, source_name: str, pump_name: str, outdir: Path, fmt: str, header):
    source = build_source(cfg, source_name)
    jsa = source_jsa(source, cfg.pump(pump_name))
    p = purity(schmidt_decompose(jsa))
    path = outdir / f"jsa_{source_name}_{pump_name}.{fmt}"
    if fmt == "json":
        io.write_jsa_json(
            path,
            jsa,
            metadata={"source": source_name, "pump": pump_name, "header": list(header)},
        )
    else:
        io.write_jsa_csv(path, jsa, header_lines=header)
    return f"jsa source={source_name} pump={pump_name} purity={p:.4f}", [path]


def run_schmidt(cfg: RunConfig, source_name: str, pump_name: str, outdir: Path, fmt: str, header):
    spectrum = source_schmidt(cfg, source_name, pump_name)
    path = outdir / f"schmidt_{source_name}_{pump_name}.csv"
    io.write_schmidt_csv(path, spectrum, header_lines=header)
    p = purity(spectrum)
    return (
        f"schmidt source={source_name} pump={pump_name} "
        f"purity={p:.4f} schmidt_number={schmidt_number(spectrum):.4f}"
    ), [path]


def run_optimize_pump(cfg: RunConfig, source_name: str, pump_name: str, outdir: Path, fmt, header):
    source = build_source(cfg, source_name)
    pump = cfg.pump(pump_name)
    result = optimize_pump_bandwidth(source_pmf(source), source.grid, pump.center_nm)
    path = outdir / f"optimize_pump_{source_name}.csv"
    io.write_keyvalue_csv(
        path,
        [("fwhm_nm", result.fwhm_nm), ("purity", result.purity)],
        header_lines=header,
    )
    return (
        f"optimize-pump source={source_name} fwhm_nm={result.fwhm_nm:.4f} "
        f"purity={result.purity:.4f}"
    ), [path]


def run_hom(cfg: RunConfig, outdir: Path, fmt: str, header):
    top = source_schmidt(cfg, "top", "top")
    bot = source_schmidt(cfg, "bot", "bot")
    trace = hom_dip_trace(top, bot, cfg.interferometer())
    path = outdir / "hom_trace.csv"
    io.write_hom_trace_csv(path, trace, header_lines=header)
    return f"hom visibility={trace.visibility:.4f}", [path]


def run_rsweep(cfg: RunConfig, outdir: Path, fmt: str, header, ideal: bool = True):
    if ideal:
        grid = cfg.grid_for("top")
        a = b = ideal_source(grid)
    else:
        a = source_schmidt(cfg, "top", "top")
        b = source_schmidt(cfg, "bot", "bot")
    sweep = visibility_vs_reflectivity(a, b, cfg.rsweep_values())
    path = outdir / "rsweep.csv"
    io.write_rsweep_csv(path, sweep, header_lines=header)
    best = sweep[np.argmax(sweep[:, 1])]
    return f"rsweep max_visibility={best[1]:.4f} at R={best[0]:.3f}", [path]


def run_g2(cfg: RunConfig, source_name: str, pump_name: str, outdir: Path, fmt, header):
    spectrum = source_schmidt(cfg, source_name, pump_name)
    result = g2_purity(spectrum)
    path = outdir / f"g2_{source_name}_{pump_name}.csv"
    io.write_keyvalue_csv(
        path,
        [("g2_zero", result.g2_zero), ("purity", result.purity)],
        header_lines=header,
    )
    return (
        f"g2 source={source_name} g2_zero={result.g2_zero:.4f} "
        f"purity={result.purity:.4f}"
    ), [path]


def _simulated_stream(cfg: RunConfig) -> TagStream:
    top = source_schmidt(cfg, "top", "top")
    bot = source_schmidt(cfg, "bot", "bot")
    return simulate_tag_stream(cfg.pulse_train(), (top, bot))


def run_simulate(cfg: RunConfig, outdir: Path, fmt: str, header):
    stream = _simulated_stream(cfg)
    csv_path = outdir / "tagstream.csv"
    bin_path = outdir / "tagstream.bin"
    io.write_tagstream_csv(csv_path, stream, header_lines=header)
    io.write_tagstream_binary(bin_path, stream)
    counts = stream.counts()
    pairs = " ".join(f"{name}={counts[name]}" for name in sorted(counts))
    return f"simulate {pairs}", [csv_path, bin_path]


def run_pspdc(cfg: RunConfig, outdir: Path, fmt: str, header):
    stream = _simulated_stream(cfg)
    train = cfg.pulse_train()
    bin_width, window = cfg.counting_windows()
    # each source against its dominant splitter output (bar for top, cross
    # for bot at a symmetric coupler)
    hist_top = coincidence_histogram(stream, "idler_top", "signal_bar", bin_width, window)
    hist_bot = coincidence_histogram(stream, "idler_bot", "signal_cross", bin_width, window)
    single_top = estimate_pspdc_single(hist_top, train.repetition_rate)
    single_bot = estimate_pspdc_single(hist_bot, train.repetition_rate)
    top, bot = solve_pspdc_pair(
        hist_top, hist_bot, train.repetition_rate, train.reflectivity
    )
    paths = []
    for tag, hist in (("top", hist_top), ("bot", hist_bot)):
        path = outdir / f"pspdc_histogram_{tag}.csv"
        io.write_histogram_csv(path, hist, header_lines=header)
        paths.append(path)
    est_path = outdir / "pspdc_estimates.csv"
    io.write_keyvalue_csv(
        est_path,
        [
            ("single_top", single_top.value),
            ("single_top_stderr", single_top.stderr),
            ("single_bot", single_bot.value),
            ("single_bot_stderr", single_bot.stderr),
            ("coupled_top", top.value),
            ("coupled_top_stderr", top.stderr),
            ("coupled_bot", bot.value),
            ("coupled_bot_stderr", bot.stderr),
        ],
        header_lines=header,
    )
    paths.append(est_path)
    return (
        f"pspdc coupled_top={top.value:.5f}({top.stderr:.5f}) "
        f"coupled_bot={bot.value:.5f}({bot.stderr:.5f})"
    ), paths


def run_tofmap(cfg: RunConfig, source_name: str, pump_name: str, outdir: Path, fmt, header):
    source = build_source(cfg, source_name)
    jsa = source_jsa(source, cfg.pump(pump_name))
    tof = cfg.tof()
    seed = cfg.pulse_train().seed
    lam_s, lam_i = sample_jsi_pairs(jsa.intensity(), source.grid, tof["n_samples"], seed=seed)
    ref_s = angular_frequency_to_nm(source.grid.signal_center)
    ref_i = angular_frequency_to_nm(source.grid.idler_center)
    disp = tof["dispersion_ns_per_nm"]
    # through the fiber and back: delays are what a time tagger records
    mapped_s = tof_map(delays_from_wavelengths(lam_s, disp, ref_s), disp, ref_s)
    mapped_i = tof_map(delays_from_wavelengths(lam_i, disp, ref_i), disp, ref_i)
    bins = tof["jsi_bins"]
    hist, edges_s, edges_i = np.histogram2d(mapped_s, mapped_i, bins=bins)
    path = outdir / f"tofmap_{source_name}.csv"
    centers_s = 0.5 * (edges_s[:-1] + edges_s[1:])
    centers_i = 0.5 * (edges_i[:-1] + edges_i[1:])
    io.write_tofmap_csv(path, centers_s, centers_i, hist, header_lines=header)
    peak = np.unravel_index(int(np.argmax(hist)), hist.shape)
    return (
        f"tofmap source={source_name} n={tof['n_samples']} "
        f"peak_nm=({centers_s[peak[0]]:.2f},{centers_i[peak[1]]:.2f})"
    ), [path]


def two_source_report(cfg: RunConfig) -> dict:
    """Purity and overlap numbers for the bundled experimental presets."""
    out: dict[str, float] = {}
    spectra = {}
    grids = {}
    for name in ("top", "bot"):
        source = build_source(cfg, name)
        jsa = source_jsa(source, cfg.pump(name))
        spectrum = schmidt_decompose(jsa)
        spectra[name] = spectrum
        grids[name] = source.grid
        out[f"purity_{name}"] = purity(spectrum)
        from .jointspectrum import purity_from_intensity

        out[f"sqrt_jsi_purity_{name}"] = purity_from_intensity(
            jsa.intensity(), source.grid, mode="sqrt"
        )
        out[f"marginal_{name}"] = marginals(jsa)[0]
    out["signal_marginal_overlap"] = marginal_overlap(
        out.pop("marginal_top"), out.pop("marginal_bot"), grids["top"].signal_spacing
    )
    trace = hom_dip_trace(spectra["top"], spectra["bot"], cfg.interferometer())
    out["hom_visibility"] = trace.visibility
    return out
