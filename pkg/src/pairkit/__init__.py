"""pairkit: design and analysis of quasi-phase-matched photon-pair sources.

Submodules follow the pipeline: ``dispersion`` and ``grids`` set up the
frequency-domain model, ``poling`` compiles nonlinearity profiles into
domain patterns and evaluates phase-matching functions, ``jointspectrum``
composes and decomposes joint spectral amplitudes, ``interference``
predicts heralded two-source Hong-Ou-Mandel visibilities, and ``counting``
simulates time-tag streams and recovers source statistics from them.
"""

__version__ = "0.1.0"

from .dispersion import DispersionBranch, DispersionModel, phase_mismatch
from .errors import ConfigError, DomainError
from .grids import FrequencyGrid, grid_points
from .interference import (
    G2Result,
    HomTrace,
    InterferometerConfig,
    g2_purity,
    hom_dip_trace,
    hom_visibility,
    visibility_vs_reflectivity,
)
from .jointspectrum import (
    JointSpectrum,
    PumpEnvelope,
    SchmidtSpectrum,
    compose_jsa,
    gaussian_pef,
    marginals,
    optimize_pump_bandwidth,
    purity,
    purity_from_intensity,
    schmidt_decompose,
    schmidt_number,
)
from .poling import (
    NonlinearityProfile,
    PolingPattern,
    pmf_analytic_periodic,
    pmf_from_pattern,
    sidelobe_report,
    synthesize_pattern,
)
from .counting import (
    CoincidenceHistogram,
    PulseTrainConfig,
    TagStream,
    coincidence_histogram,
    estimate_pspdc_coupled,
    estimate_pspdc_single,
    normalize_fourfolds,
    simulate_tag_stream,
    solve_pspdc_pair,
    tof_map,
)

__all__ = [name for name in dir() if not name.startswith("_")]
