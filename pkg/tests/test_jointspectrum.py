import numpy as np
import pytest

from pairkit.errors import OptimizerBoundaryWarning
from pairkit.grids import FrequencyGrid
from pairkit.jointspectrum import (
    JointSpectrum,
    PumpEnvelope,
    SchmidtSpectrum,
    compose_jsa,
    gaussian_pef,
    golden_section_maximize,
    marginal_overlap,
    marginals,
    optimize_pump_bandwidth,
    purity,
    purity_from_intensity,
    purity_from_matrix,
    schmidt_decompose,
    schmidt_number,
)
from pairkit.units import angular_frequency_to_nm, nm_to_angular_frequency

WS0 = nm_to_angular_frequency(1505.0)
WI0 = nm_to_angular_frequency(1556.672073533388)
WP0 = WS0 + WI0


def _grid(n=96, span=2e13):
    return FrequencyGrid(WS0, WI0, span, span, n, n)


def _correlated_gaussian(grid, a, b, chirp=0.0):
    """Amplitude exp(-a u^2 - b v^2 + i chirp u^2), u/v the +-45 deg axes."""
    ws, wi = grid.meshes()
    u = ws + wi - WP0
    v = (ws - WS0) - (wi - WI0)
    return np.exp(-a * u * u - b * v * v + 1j * chirp * u * u)


def _gaussian_purity_closed_form(a, b):
    # Closed form for amplitude exp(-a u^2 - b v^2): expanding in x = u+v,
    # y = u-v gives a Gaussian with cross term whose Schmidt ladder is
    # geometric, nu_n^2 = (1 - rho^2) rho^(2n), and sum nu^4 collapses to
    # 2 sqrt(ab) / (a + b).
    return 2.0 * np.sqrt(a * b) / (a + b)


# ---------------------------------------------------------------------------
# pump envelope


def test_pef_peaks_on_the_energy_conservation_line():
    grid = _grid(33)
    pump = PumpEnvelope(center_nm=angular_frequency_to_nm(WP0), fwhm_nm=1.8)
    pef = gaussian_pef(pump, grid)
    # center point sits exactly on omega_s + omega_i = omega_p
    assert pef[16, 16] == pytest.approx(1.0)
    assert np.abs(pef).max() == pytest.approx(1.0)


def test_pef_depends_on_frequency_sum_only():
    grid = _grid(33)
    pump = PumpEnvelope(center_nm=angular_frequency_to_nm(WP0), fwhm_nm=1.8, chirp=3e-26)
    pef = gaussian_pef(pump, grid)
    # equal-spacing grid: antidiagonal neighbors share omega_s + omega_i
    assert pef[10, 20] == pytest.approx(pef[20, 10], rel=1e-12)
    assert pef[5, 12] == pytest.approx(pef[12, 5], rel=1e-12)


def test_bundled_pump_presets_carry_the_experimental_parameters(cfg):
    top = cfg.pump("top")
    bot = cfg.pump("bot")
    assert (top.center_nm, top.fwhm_nm) == (765.2, 1.84)
    assert (bot.center_nm, bot.fwhm_nm) == (761.1, 1.65)


def test_pump_validation():
    with pytest.raises(ValueError):
        PumpEnvelope(center_nm=765.2, fwhm_nm=0.0)
    with pytest.raises(ValueError):
        PumpEnvelope(center_nm=-1.0, fwhm_nm=1.0)


# ---------------------------------------------------------------------------
# composition


def test_uniform_pef_returns_pmf_up_to_scale():
    grid = _grid(48)
    pmf = _correlated_gaussian(grid, 0.0, 1e-26)
    jsa = compose_jsa(np.ones_like(pmf), pmf, grid)
    ratio = jsa.amplitude / pmf
    assert np.allclose(ratio, ratio[0, 0], rtol=1e-12)
    assert jsa.norm_squared() == pytest.approx(1.0, abs=1e-9)


def test_disjoint_supports_raise():
    grid = _grid(16)
    pef = np.zeros((16, 16))
    pef[:4] = 1.0
    pmf = np.zeros((16, 16))
    pmf[12:] = 1.0
    with pytest.raises(ValueError, match="overlap"):
        compose_jsa(pef, pmf, grid)


def test_mismatched_shapes_raise():
    grid = _grid(16)
    with pytest.raises(ValueError):
        compose_jsa(np.ones((16, 16)), np.ones((16, 15)), grid)


def test_matched_gaussian_product_is_rank_one():
    grid = _grid(96)
    a = 1.0 / (2 * (3.5e12) ** 2)
    amplitude = _correlated_gaussian(grid, a, a)
    spectrum = schmidt_decompose(JointSpectrum(grid, amplitude))
    assert spectrum.coefficients[0] == pytest.approx(1.0, abs=1e-7)
    assert purity(spectrum) == pytest.approx(1.0, abs=1e-6)


# ---------------------------------------------------------------------------
# Schmidt decomposition


def test_outer_product_is_rank_one():
    grid = _grid(64)
    ws = grid.signal_axis()
    wi = grid.idler_axis()
    u = np.exp(-0.5 * ((ws - WS0) / 2e12) ** 2)
    v = np.exp(-0.5 * ((wi - WI0) / 3e12) ** 2) * np.exp(1j * 1e-13 * (wi - WI0))
    spectrum = schmidt_decompose(JointSpectrum(grid, np.outer(u, v)))
    assert spectrum.coefficients[0] == pytest.approx(1.0, abs=1e-9)
    assert spectrum.n_modes == 1  # everything else truncated


def test_correlated_gaussian_matches_closed_form_and_fine_grid_oracle():
    a = 1.0 / (2 * (3.2e12) ** 2)
    b = 3.0 * a
    expected = _gaussian_purity_closed_form(a, b)

    coarse = schmidt_decompose(JointSpectrum(_grid(512, 4.5e13), _correlated_gaussian(_grid(512, 4.5e13), a, b)))
    assert purity(coarse) == pytest.approx(expected, abs=1e-5)

    # fine-grid SVD oracle
    fine_grid = _grid(2048, 4.5e13)
    amp = _correlated_gaussian(fine_grid, a, b)
    sv = np.linalg.svd(amp, compute_uv=False)
    fine_purity = float(np.sum(sv**4) / np.sum(sv**2) ** 2)
    assert purity(coarse) == pytest.approx(fine_purity, abs=1e-4)


def test_transpose_swaps_modes_and_keeps_coefficients(top_jsa):
    direct = schmidt_decompose(top_jsa)
    swapped = schmidt_decompose(top_jsa.transposed())
    n = min(direct.n_modes, swapped.n_modes, 12)
    assert np.allclose(direct.coefficients[:n], swapped.coefficients[:n], atol=1e-10)
    # dominant signal mode of one equals dominant idler mode of the other
    lead = np.abs(direct.signal_modes[:, 0])
    lead_swapped = np.abs(swapped.idler_modes[:, 0])
    assert np.allclose(lead, lead_swapped, atol=1e-8 * lead.max())


def test_schmidt_invariants(top_schmidt, top_jsa):
    nu = top_schmidt.coefficients
    assert np.sum(nu**2) == pytest.approx(1.0, abs=1e-9)
    assert np.all(np.diff(nu) <= 0)
    ds = top_schmidt.signal_spacing()
    gram = top_schmidt.signal_modes.conj().T @ top_schmidt.signal_modes * ds
    assert np.allclose(gram, np.eye(top_schmidt.n_modes), atol=1e-8)
    recon = top_schmidt.reconstruct()
    err = np.linalg.norm(recon - top_jsa.amplitude) / np.linalg.norm(top_jsa.amplitude)
    assert err <= 1e-7


def test_non_finite_amplitude_rejected():
    grid = _grid(8)
    bad = np.ones((8, 8))
    bad[3, 3] = np.nan
    with pytest.raises(ValueError):
        JointSpectrum(grid, bad)


# ---------------------------------------------------------------------------
# purity


def test_rank_one_purity():
    axis = np.linspace(WS0 - 1e12, WS0 + 1e12, 32)
    ds = axis[1] - axis[0]
    mode = np.exp(-0.5 * ((axis - WS0) / 3e11) ** 2)
    mode /= np.sqrt(np.sum(mode**2) * ds)
    spectrum = SchmidtSpectrum(
        coefficients=np.array([1.0]),
        signal_modes=mode[:, None],
        idler_modes=mode[:, None],
        signal_axis=axis,
        idler_axis=axis,
    )
    assert purity(spectrum) == 1.0
    assert schmidt_number(spectrum) == 1.0


def test_two_equal_coefficients():
    axis = np.linspace(WS0 - 1e12, WS0 + 1e12, 32)
    ds = axis[1] - axis[0]
    modes = np.zeros((32, 2))
    modes[4, 0] = 1.0 / np.sqrt(ds)
    modes[9, 1] = 1.0 / np.sqrt(ds)
    spectrum = SchmidtSpectrum(
        coefficients=np.array([np.sqrt(0.5), np.sqrt(0.5)]),
        signal_modes=modes,
        idler_modes=modes,
        signal_axis=axis,
        idler_axis=axis,
    )
    assert purity(spectrum) == pytest.approx(0.5)
    assert schmidt_number(spectrum) == pytest.approx(2.0)


def test_purity_from_matrix_equals_svd_route():
    rng = np.random.default_rng(4)
    for _ in range(10):
        amp = rng.standard_normal((40, 40)) + 1j * rng.standard_normal((40, 40))
        sv = np.linalg.svd(amp, compute_uv=False)
        expected = float(np.sum(sv**4) / np.sum(sv**2) ** 2)
        assert purity_from_matrix(amp) == pytest.approx(expected, rel=1e-10)


# ---------------------------------------------------------------------------
# intensity-based estimation


def test_sqrt_jsi_of_rank_one_is_pure():
    grid = _grid(64)
    ws = grid.signal_axis()
    wi = grid.idler_axis()
    u = np.exp(-0.5 * ((ws - WS0) / 2e12) ** 2)
    v = np.exp(-0.5 * ((wi - WI0) / 2.5e12) ** 2)
    jsa = JointSpectrum(grid, np.outer(u, v))
    assert purity_from_intensity(jsa.intensity(), grid) == pytest.approx(1.0, abs=1e-9)


def test_sqrt_estimator_is_blind_to_chirp_phase():
    grid = _grid(96)
    a = 1.0 / (2 * (3.5e12) ** 2)
    chirped = JointSpectrum(grid, _correlated_gaussian(grid, a, a, chirp=1.2e-25))
    true_purity = purity(schmidt_decompose(chirped))
    sqrt_estimate = purity_from_intensity(chirped.intensity(), grid, mode="sqrt")
    assert sqrt_estimate > true_purity + 0.05
    assert sqrt_estimate == pytest.approx(1.0, abs=1e-6)


def test_two_source_presets_reproduce_the_estimator_ordering(
    top_jsa, bot_jsa, top_schmidt, bot_schmidt
):
    # sqrt-JSI estimates sit above the phase-aware purities for both sources
    for jsa, spectrum in ((top_jsa, top_schmidt), (bot_jsa, bot_schmidt)):
        sqrt_estimate = purity_from_intensity(jsa.intensity(), jsa.grid, mode="sqrt")
        assert sqrt_estimate > purity(spectrum)


def test_raw_mode_is_the_biased_alternative():
    grid = _grid(64)
    # rank-1 stays pure under both conventions
    ws = grid.signal_axis()
    wi = grid.idler_axis()
    u = np.exp(-0.5 * ((ws - WS0) / 2e12) ** 2)
    v = np.exp(-0.5 * ((wi - WI0) / 2e12) ** 2)
    jsi = np.outer(u, v) ** 2
    assert purity_from_intensity(jsi, grid, mode="raw") == pytest.approx(1.0, abs=1e-9)
    # nonnegative non-Gaussian spectrum: the sqrt estimate recovers the
    # true amplitude-level purity, the raw decomposition does not
    WS, WI = grid.meshes()
    uu = WS + WI - WP0
    vv = (WS - WS0) - (WI - WI0)
    amplitude = np.sinc(vv / 6e12) ** 2 * np.exp(-(uu**2) / (2 * (3e12) ** 2))
    true_purity = purity(schmidt_decompose(JointSpectrum(grid, amplitude)))
    sqrt_estimate = purity_from_intensity(amplitude**2, grid, mode="sqrt")
    raw_estimate = purity_from_intensity(amplitude**2, grid, mode="raw")
    assert sqrt_estimate == pytest.approx(true_purity, abs=1e-9)
    assert abs(raw_estimate - true_purity) > 1e-3


def test_purity_from_intensity_validation():
    grid = _grid(8)
    with pytest.raises(ValueError):
        purity_from_intensity(-np.ones((8, 8)), grid)
    with pytest.raises(ValueError):
        purity_from_intensity(np.ones((8, 8)), grid, mode="weird")


# ---------------------------------------------------------------------------
# marginals


def test_marginals_of_separable_jsa_are_the_factors():
    grid = _grid(64)
    ws = grid.signal_axis()
    wi = grid.idler_axis()
    u = np.exp(-0.5 * ((ws - WS0) / 2e12) ** 2)
    v = np.exp(-0.5 * ((wi - WI0) / 3e12) ** 2)
    jsa = JointSpectrum(grid, np.outer(u, v))
    ms, mi = marginals(jsa)
    u2 = u**2 / (np.sum(u**2) * grid.signal_spacing)
    v2 = v**2 / (np.sum(v**2) * grid.idler_spacing)
    assert np.allclose(ms, u2, rtol=1e-9)
    assert np.allclose(mi, v2, rtol=1e-9)
    assert np.sum(ms) * grid.signal_spacing == pytest.approx(1.0, abs=1e-8)
    assert np.sum(mi) * grid.idler_spacing == pytest.approx(1.0, abs=1e-8)


def test_marginals_swap_under_transpose(top_jsa):
    ms, mi = marginals(top_jsa)
    ms_t, mi_t = marginals(top_jsa.transposed())
    assert np.allclose(ms, mi_t) and np.allclose(mi, ms_t)


def test_preset_signal_marginals_overlap(top_jsa, bot_jsa):
    ms_top, _ = marginals(top_jsa)
    ms_bot, _ = marginals(bot_jsa)
    overlap = marginal_overlap(ms_top, ms_bot, top_jsa.grid.signal_spacing)
    assert overlap >= 0.9


# ---------------------------------------------------------------------------
# pump-bandwidth optimization


def test_golden_section_on_a_parabola():
    x, fx, boundary = golden_section_maximize(lambda x: -((x - 1.7) ** 2), 0.0, 5.0, 1e-5)
    assert x == pytest.approx(1.7, abs=1e-4)
    assert not boundary


def test_optimize_matches_dense_sweep_oracle(device400):
    from pairkit.poling import pmf_from_pattern

    pmf = pmf_from_pattern(device400["gaussian"], device400["model"], device400["grid"])
    result = optimize_pump_bandwidth(pmf, device400["grid"], 765.2)

    sweeps = np.linspace(0.3, 6.0, 50)
    purities = []
    for fwhm in sweeps:
        pump = PumpEnvelope(center_nm=765.2, fwhm_nm=fwhm)
        purities.append(purity_from_matrix(gaussian_pef(pump, device400["grid"]) * pmf))
    purities = np.array(purities)
    k = int(np.argmax(purities))
    # rises monotonically to the optimum and falls monotonically after it
    assert np.all(np.diff(purities[: k + 1]) > -1e-9)
    assert np.all(np.diff(purities[k:]) < 1e-9)
    assert result.purity >= purities.max() - 1e-6
    assert abs(result.fwhm_nm - sweeps[k]) <= (sweeps[1] - sweeps[0])


def test_optimize_recovers_matched_bandwidth_for_synthetic_pmf():
    grid = _grid(128, span=2.5e13)
    sigma_v = 3.0e12
    ws, wi = grid.meshes()
    v = (ws - WS0) - (wi - WI0)
    pmf = np.exp(-(v * v) / (2 * sigma_v**2))
    center_nm = angular_frequency_to_nm(WP0)
    result = optimize_pump_bandwidth(pmf, grid, center_nm)
    # matched-bandwidth condition: pump sigma equals the PMF sigma
    from pairkit.units import bandwidth_nm_at

    expected_fwhm = bandwidth_nm_at(2 * np.sqrt(np.log(2)) * sigma_v, center_nm)
    assert result.fwhm_nm == pytest.approx(expected_fwhm, rel=0.02)
    assert result.purity == pytest.approx(1.0, abs=1e-4)


def test_tophat_optimum_below_gaussian_optimum(device400):
    from pairkit.poling import pmf_from_pattern

    grid = device400["grid"]
    model = device400["model"]
    best = {}
    for name in ("periodic", "gaussian"):
        pmf = pmf_from_pattern(device400[name], model, grid)
        best[name] = optimize_pump_bandwidth(pmf, grid, 765.2).purity
    assert best["periodic"] < best["gaussian"]


def test_optimizer_warns_on_boundary():
    grid = _grid(32)
    ws, wi = grid.meshes()
    v = (ws - WS0) - (wi - WI0)
    pmf = np.exp(-(v / 8e12) ** 2)
    with pytest.warns(OptimizerBoundaryWarning):
        result = optimize_pump_bandwidth(
            pmf, grid, angular_frequency_to_nm(WP0), bracket_nm=(8.0, 12.0)
        )
    assert result.hit_boundary


# ---------------------------------------------------------------------------
# chirp behavior


def test_purity_nonincreasing_along_chirp_ladder(cfg, top_bundle, top_pmf):
    pump = cfg.pump("top")
    last = np.inf
    sqrt_estimates = []
    for chirp in (0.0, 2e-26, 5e-26, 1e-25):
        envelope = gaussian_pef(
            PumpEnvelope(center_nm=pump.center_nm, fwhm_nm=pump.fwhm_nm, chirp=chirp),
            top_bundle.grid,
        )
        jsa = compose_jsa(envelope, top_pmf, top_bundle.grid)
        p = purity(schmidt_decompose(jsa))
        assert p <= last + 1e-9
        last = p
        sqrt_estimates.append(purity_from_intensity(jsa.intensity(), top_bundle.grid))
    # the sqrt-JSI estimate ignores spectral phase entirely
    assert np.ptp(sqrt_estimates) <= 1e-9
