"""Holdout randomization testing: statistics, p-values, selection, pipeline."""

from .pipeline import (
    PipelineConfig,
    PipelineState,
    prepare_pipeline,
    run_pipeline,
    split_rows,
    test_with_response,
)
from .report import TestReport
from .selection import bh_select, brute_force_bh, by_select
from .statistics import empirical_pvalue, neg_mse_statistic, null_statistics, observed_statistic

__all__ = [
    "PipelineConfig",
    "PipelineState",
    "TestReport",
    "bh_select",
    "brute_force_bh",
    "by_select",
    "empirical_pvalue",
    "neg_mse_statistic",
    "null_statistics",
    "observed_statistic",
    "prepare_pipeline",
    "run_pipeline",
    "split_rows",
    "test_with_response",
]
