"""Risk-trajectory evaluation for early event prediction."""

from ._core import (
    AggregateRow,
    AlertTrace,
    Episode,
    EvalInstance,
    FoldRow,
    MeanStd,
    MetricReport,
    RiskTrajectory,
    RiskstabError,
    StabilityResult,
    aggregate_folds,
    auprc,
    auroc,
    f1_at_threshold,
    flip_count,
    generate_cohort,
    ks_distance,
    label_at,
    parse_event_file,
    preset_horizon,
    preset_names,
    preset_probe_radii,
    run_pipeline,
    sample_reference_times,
    stability_lc,
    write_event_file,
)

__all__ = [
    "AggregateRow",
    "AlertTrace",
    "Episode",
    "EvalInstance",
    "FoldRow",
    "MeanStd",
    "MetricReport",
    "RiskTrajectory",
    "RiskstabError",
    "StabilityResult",
    "aggregate_folds",
    "auprc",
    "auroc",
    "f1_at_threshold",
    "flip_count",
    "generate_cohort",
    "ks_distance",
    "label_at",
    "parse_event_file",
    "preset_horizon",
    "preset_names",
    "preset_probe_radii",
    "run_pipeline",
    "sample_reference_times",
    "stability_lc",
    "write_event_file",
]
