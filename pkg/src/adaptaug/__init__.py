"""Loss-adaptive spectrogram augmentation with progressive scheduling.

The package turns per-sample training losses into per-sample augmentation
strength: losses are normalized to a policy value lambda in [0, 1] through
a regularized-incomplete-beta transform, lambda picks how many time masks,
frequency masks, and time substitutions each sample receives, and an
epoch-driven schedule ramps the probability of taking the adaptive path
instead of the fixed baseline.
"""

from .augment import (
    AugLimits,
    FreqMask,
    TimeMask,
    TimeSub,
    apply_plan,
    plan_freq_masks,
    plan_time_masks,
    plan_time_subs,
)
from .betainc import DEFAULT_IBF, IbfParams, betainc_reg, regularized_ibf
from .engine import (
    GATE_ADAPTIVE,
    GATE_FIXED,
    BatchAugReport,
    EngineConfig,
    SampleAugRecord,
    augment_batch,
)
from .policy import (
    FIXED_COUNTS,
    AugCounts,
    LossPipelineTrace,
    counts_from_lambda,
    hybrid_normalize,
    rank_policy,
)
from .rng import Stream, derive_sample_stream, derive_stream_seed
from .schedule import ScheduleConfig, ScheduleState, schedule_at
from .simulate import SimConfig, SimMetrics, SyntheticTask, run_simulation
from .storage import (
    FormatError,
    ManifestEntry,
    engine_config_from_mapping,
    engine_config_to_mapping,
    load_engine_config,
    read_features,
    read_manifest,
    read_report,
    report_to_mappings,
    schedule_state_to_mapping,
    trace_to_mapping,
    write_features,
    write_manifest,
    write_report,
)

__version__ = "0.1.0"

__all__ = [
    "AugCounts",
    "AugLimits",
    "BatchAugReport",
    "DEFAULT_IBF",
    "EngineConfig",
    "FIXED_COUNTS",
    "FormatError",
    "FreqMask",
    "GATE_ADAPTIVE",
    "GATE_FIXED",
    "IbfParams",
    "LossPipelineTrace",
    "ManifestEntry",
    "SampleAugRecord",
    "ScheduleConfig",
    "ScheduleState",
    "SimConfig",
    "SimMetrics",
    "Stream",
    "SyntheticTask",
    "TimeMask",
    "TimeSub",
    "apply_plan",
    "augment_batch",
    "betainc_reg",
    "counts_from_lambda",
    "derive_sample_stream",
    "derive_stream_seed",
    "engine_config_from_mapping",
    "engine_config_to_mapping",
    "hybrid_normalize",
    "load_engine_config",
    "plan_freq_masks",
    "plan_time_masks",
    "plan_time_subs",
    "rank_policy",
    "read_features",
    "read_manifest",
    "read_report",
    "regularized_ibf",
    "report_to_mappings",
    "run_simulation",
    "schedule_at",
    "schedule_state_to_mapping",
    "trace_to_mapping",
    "write_features",
    "write_manifest",
    "write_report",
    "__version__",
]
