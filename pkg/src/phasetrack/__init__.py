"""Feedforward phase-noise compensation for ISI channels and Monte-Carlo
achievable-rate evaluation."""

__version__ = "0.1.0"

from .channel import (  # noqa: F401
    ChromaticDispersion,
    CirculantOfdm,
    Identity,
    NoiseParams,
    PnParams,
    apply_isi,
    apply_pn_channel,
    make_channel,
    sample_wiener_phase,
)
from .framing import Constellation, Frame, PilotScheme, build_frame, waterfill  # noqa: F401
from .harness import ScenarioConfig, emit_tsv, run_sweep  # noqa: F401
from .lmmse import LmmseFilterSpec, build_lmmse_filter, run_lmmse  # noqa: F401
from .rates import RateEstimate, SddMetricParams, calibrate_metric, gmi_frame  # noqa: F401
from .spa import CompensatorOutput, SpaInputs, run_spa  # noqa: F401
