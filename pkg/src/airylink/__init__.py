"""Quasi-line-of-sight THz MIMO link simulator.

Models partially blocked terahertz links with three channel models
(ray-tracing, wave-diffraction, and a cascaded geometric approximation
of the latter), synthesizes curved Airy-type beams, builds
correlation-driven codebooks, and evaluates beam-search schemes by
spectral efficiency and training overhead.
"""

__version__ = "0.1.0"

from . import _threads

# Thread caps must land before numpy loads anywhere in this process.
_threads.apply()

from .scenario import (
    ArrayConfig,
    BlockageGeometry,
    CarrierConfig,
    ScenarioConfig,
    VirtualArrayConfig,
    element_positions,
    shadow_bounds,
)
from .beam import BeamParams, BeamVector, airy_beam_vector
from .channel import (
    ChannelMatrix,
    CalibrationParams,
    apply_calibration,
    calibrate,
    cgwcm_channel,
    gcm_channel,
    wcm_channel,
)
from .codebook import SamplingPlan, Codebook, solve_sampling_plan
from .search import SearchResult, TrainingConfig, exhaustive_search, measure_slot
from .evaluation import (
    Beamformers,
    BeamformingScheme,
    SweepSpec,
    run_sweep,
    spectral_efficiency,
)

__all__ = [
    "__version__",
    "ArrayConfig",
    "BlockageGeometry",
    "CarrierConfig",
    "ScenarioConfig",
    "VirtualArrayConfig",
    "element_positions",
    "shadow_bounds",
    "BeamParams",
    "BeamVector",
    "airy_beam_vector",
    "ChannelMatrix",
    "CalibrationParams",
    "apply_calibration",
    "calibrate",
    "cgwcm_channel",
    "gcm_channel",
    "wcm_channel",
    "SamplingPlan",
    "Codebook",
    "solve_sampling_plan",
    "SearchResult",
    "TrainingConfig",
    "exhaustive_search",
    "measure_slot",
    "Beamformers",
    "BeamformingScheme",
    "SweepSpec",
    "run_sweep",
    "spectral_efficiency",
]
