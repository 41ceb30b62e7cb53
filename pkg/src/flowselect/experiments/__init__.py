"""Benchmark generation, ingestion, and replicated evaluation."""

from ..mog import MoGSpec, gen_mog_features
from .ingest import (
    UnitIntervalScaling,
    load_feature_csv,
    load_response_csv,
    normalize_unit_interval,
    select_top_correlated,
    write_feature_csv,
)
from .metrics import evaluate_selection
from .replicate import (
    DatasetConfig,
    ExperimentResult,
    ReplicateRecord,
    aggregate_records,
    check_experiment_integrity,
    replicate_experiment,
    write_replicates_csv,
)
from .response import MODE_LINEAR, MODE_SINE_COSINE, ResponseSpec, draw_response_spec, gen_response

__all__ = [
    "DatasetConfig",
    "ExperimentResult",
    "MODE_LINEAR",
    "MODE_SINE_COSINE",
    "MoGSpec",
    "ReplicateRecord",
    "ResponseSpec",
    "UnitIntervalScaling",
    "aggregate_records",
    "check_experiment_integrity",
    "draw_response_spec",
    "evaluate_selection",
    "gen_mog_features",
    "gen_response",
    "load_feature_csv",
    "load_response_csv",
    "normalize_unit_interval",
    "replicate_experiment",
    "select_top_correlated",
    "write_replicates_csv",
    "write_feature_csv",
]
