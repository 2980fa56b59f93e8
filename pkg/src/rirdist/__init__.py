"""Room impulse response synthesis, quality screening, and speaker
distance estimation."""

from .acoustics import (
    AcousticMetrics,
    DrrEstimate,
    EchoDensityProfile,
    EnergyDecayCurve,
    InsufficientDecayError,
    RIRecording,
    T60Estimate,
    ZeroEnergyError,
    analyze_rir,
    compute_drr,
    detect_direct_path,
    early_reflection_profile,
    estimate_t60,
    geometric_distance,
    schroeder_edc,
)
from .estimator import (
    EstimatorModel,
    EvalReport,
    FeatureVector,
    GridCell,
    TrainConfig,
    evaluate,
    extract_features,
    grid_search,
    predict,
    split_dataset,
    sse_loss_and_gradient,
    standardize_stats,
    train,
)
from .filtering import (
    FilterBatchResult,
    FilterCriteria,
    FilterDecision,
    FilterReason,
    MissingProfileError,
    ReferenceProfile,
    apply_quality_filter,
    build_reference_profile,
    filter_batch,
)
from .synth import (
    DEFAULT_CONFIG,
    GeometryError,
    SceneQuery,
    ShoeboxRoom,
    SynthesisConfig,
    builtin_room,
    builtin_room_ids,
    image_source_rir,
    normalize_rir,
    sample_scenes,
    synthesize_rir,
)

__version__ = "0.1.0"

__all__ = [
    "AcousticMetrics",
    "DrrEstimate",
    "EchoDensityProfile",
    "EnergyDecayCurve",
    "InsufficientDecayError",
    "RIRecording",
    "T60Estimate",
    "ZeroEnergyError",
    "analyze_rir",
    "compute_drr",
    "detect_direct_path",
    "early_reflection_profile",
    "estimate_t60",
    "geometric_distance",
    "schroeder_edc",
    "EstimatorModel",
    "EvalReport",
    "FeatureVector",
    "GridCell",
    "TrainConfig",
    "evaluate",
    "extract_features",
    "grid_search",
    "predict",
    "split_dataset",
    "sse_loss_and_gradient",
    "standardize_stats",
    "train",
    "FilterBatchResult",
    "FilterCriteria",
    "FilterDecision",
    "FilterReason",
    "MissingProfileError",
    "ReferenceProfile",
    "apply_quality_filter",
    "build_reference_profile",
    "filter_batch",
    "DEFAULT_CONFIG",
    "GeometryError",
    "SceneQuery",
    "ShoeboxRoom",
    "SynthesisConfig",
    "builtin_room",
    "builtin_room_ids",
    "image_source_rir",
    "normalize_rir",
    "sample_scenes",
    "synthesize_rir",
    "__version__",
]
