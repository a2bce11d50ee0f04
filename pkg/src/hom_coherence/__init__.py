"""Coherence model of two-photon interference on a beam splitter.

``optics`` holds per-pair fields and intensities, ``ensemble`` the
deterministic detuning/delay sweeps, ``montecarlo`` the Poisson event
simulator and ``cli`` the command-line front end.
"""

__version__ = "0.1.0"

from .optics import (  # noqa: E402
    Branch,
    FieldPair,
    InvalidConfigError,
    OutputIntensities,
    PairConfig,
    bs_transform,
    coincidence_product,
    make_input_fields,
    output_intensities,
)
from .ensemble import (  # noqa: E402
    CorrelationCurve,
    DetuningTrace,
    GridError,
    OutOfBandError,
    SpectralGrid,
    TauGrid,
    build_spectral_grid,
    build_tau_grid,
    closed_form_g2,
    correlation_curve,
    detuning_trace,
    mean_intensities,
)
from .montecarlo import (  # noqa: E402
    McEstimate,
    PairEvent,
    PairEvents,
    SourceConfig,
    mc_correlation,
    sample_pair_events,
)
