"""Shared fixtures: bundled-preset pipelines and kernel warmup.

Heavy objects (phase-matching maps, Schmidt decompositions of the bundled
presets, the 400-period comparison device) are session-scoped; they are
immutable, so sharing is safe.  The autouse warmup fixture triggers numba
JIT compilation before any timed acceptance test runs.
"""

import pytest

try:
    from hypothesis import settings

    settings.register_profile("repeatable", derandomize=True, max_examples=100)
    settings.load_profile("repeatable")
except ImportError:
    pass

from pairkit.config import RunConfig
from pairkit.dispersion import DispersionBranch, DispersionModel
from pairkit.grids import FrequencyGrid
from pairkit.jointspectrum import schmidt_decompose
from pairkit.pipeline import build_source, source_jsa, source_pmf
from pairkit.poling import NonlinearityProfile, pmf_from_pattern, synthesize_pattern


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile both PMF kernels once so timings measure steady state."""
    grid = FrequencyGrid(1e15, 1e15, 1e12, 1e12, 4, 4)
    branch = DispersionBranch(omega0=1e15, k0=0.0, k1=1e-9)
    model = DispersionModel(pump=branch, signal=branch, idler=branch)
    profile = NonlinearityProfile(shape="tophat")
    pattern = synthesize_pattern(profile, 4e-5, 1e-5)
    pmf_from_pattern(pattern, model, grid)
    ragged = pattern.boundaries.copy()
    ragged[1] *= 1.1  # break segment uniformity to hit the general kernel
    from pairkit.poling import PolingPattern

    pmf_from_pattern(
        PolingPattern(ragged, pattern.signs, pattern.length, pattern.nominal_period),
        model,
        grid,
    )


@pytest.fixture(scope="session")
def cfg() -> RunConfig:
    return RunConfig.load()


@pytest.fixture(scope="session")
def top_bundle(cfg):
    return build_source(cfg, "top")


@pytest.fixture(scope="session")
def bot_bundle(cfg):
    return build_source(cfg, "bot")


@pytest.fixture(scope="session")
def top_pmf(top_bundle):
    return source_pmf(top_bundle)


@pytest.fixture(scope="session")
def bot_pmf(bot_bundle):
    return source_pmf(bot_bundle)


@pytest.fixture(scope="session")
def top_jsa(cfg, top_bundle):
    return source_jsa(top_bundle, cfg.pump("top"))


@pytest.fixture(scope="session")
def bot_jsa(cfg, bot_bundle):
    return source_jsa(bot_bundle, cfg.pump("bot"))


@pytest.fixture(scope="session")
def top_schmidt(top_jsa):
    return schmidt_decompose(top_jsa)


@pytest.fixture(scope="session")
def bot_schmidt(bot_jsa):
    return schmidt_decompose(bot_jsa)


@pytest.fixture(scope="session")
def device400(cfg):
    """The bundled dispersion with a short 400-period section.

    Used by the sinc-oracle and sidelobe-suppression checks, which need the
    broad response of a short waveguide on a wide grid.
    """
    model = cfg.dispersion_model("top")
    period = 6.25e-6
    length = 400 * period
    grid = FrequencyGrid(
        signal_center=cfg.grid_for("top").signal_center,
        idler_center=cfg.grid_for("top").idler_center,
        signal_span=5.0e13,
        idler_span=5.0e13,
        n_signal=512,
        n_idler=512,
    )
    periodic = synthesize_pattern(NonlinearityProfile(shape="tophat"), length, period)
    gaussian = synthesize_pattern(
        NonlinearityProfile(shape="gaussian", gaussian_fwhm=length / 4), length, period
    )
    return {
        "model": model,
        "grid": grid,
        "period": period,
        "length": length,
        "periodic": periodic,
        "gaussian": gaussian,
    }
