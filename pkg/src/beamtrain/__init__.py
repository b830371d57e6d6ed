"""Beam-training simulator for symmetric 2x2 hybrid-MIMO mmWave links.

Pipeline: generate a polarized cluster/ray channel, beamform it with a
Gaussian-pattern codebook, rate the resulting 2x2 frequency-selective MIMO
link per subcarrier, and compare beam-selection strategies (exhaustive
search, per-link SISO sweep, two-stage K-best) on the rate/complexity
trade-off.
"""

from .antenna import (
    Codebook,
    Direction,
    GaussianPattern,
    QUASI_OMNI,
    angular_offset,
    build_codebook,
    calibrate_peak_gain,
    codebook_records,
    gaussian_gain,
    make_calibrated_pattern,
    quasi_omni_gain,
)
from .channel import (
    ChannelGenParams,
    Cluster,
    OmniChannel,
    Ray,
    flatten_rays,
    generate_channel,
    load_channel,
    normalize,
    polarization_attenuation,
    save_channel,
    strip_los,
)
from .effective import (
    BeamSelection,
    DiscreteCIR,
    LinkSpectra,
    TransferFunction,
    apply_beamforming,
    beam_score,
    beam_score_set,
    discretize,
    transfer_function,
)
from .harness import (
    ExperimentConfig,
    RealizationRecord,
    child_seed,
    emit_csv,
    emit_summary_json,
    load_config,
    load_records_csv,
    parse_config_text,
    run_experiment,
    summarize,
)
from .rate import RateConfig, db_to_linear, mimo_rate, rate_kernel
from .training import (
    BeamScoreSet,
    Candidate,
    EvalConfig,
    TrainingResult,
    compute_beam_scores,
    exhaustive_search,
    k_best_sweep,
    k_best_training,
    siso_sls,
    top_k_products,
)

__version__ = "0.1.0"

__all__ = [
    "BeamScoreSet",
    "BeamSelection",
    "Candidate",
    "ChannelGenParams",
    "Cluster",
    "Codebook",
    "Direction",
    "DiscreteCIR",
    "EvalConfig",
    "ExperimentConfig",
    "GaussianPattern",
    "LinkSpectra",
    "OmniChannel",
    "QUASI_OMNI",
    "RateConfig",
    "Ray",
    "RealizationRecord",
    "TrainingResult",
    "TransferFunction",
    "angular_offset",
    "apply_beamforming",
    "beam_score",
    "beam_score_set",
    "build_codebook",
    "calibrate_peak_gain",
    "child_seed",
    "codebook_records",
    "compute_beam_scores",
    "db_to_linear",
    "discretize",
    "emit_csv",
    "emit_summary_json",
    "exhaustive_search",
    "flatten_rays",
    "gaussian_gain",
    "generate_channel",
    "k_best_sweep",
    "k_best_training",
    "load_channel",
    "load_config",
    "load_records_csv",
    "make_calibrated_pattern",
    "mimo_rate",
    "normalize",
    "parse_config_text",
    "polarization_attenuation",
    "quasi_omni_gain",
    "rate_kernel",
    "run_experiment",
    "save_channel",
    "siso_sls",
    "strip_los",
    "summarize",
    "top_k_products",
    "transfer_function",
]
