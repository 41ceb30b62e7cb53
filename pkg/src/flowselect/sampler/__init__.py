"""Null-feature sampling from a joint model's complete conditionals."""

from ..mog import MoGConditional, exact_mog_conditional
from .cache import load_matching_nulls, load_null_samples, null_cache_path, save_null_samples
from .chains import (
    INIT_CONDITIONAL_MEAN,
    INIT_OBSERVED,
    ChainConfig,
    NullSamples,
    mh_chain,
    sample_null_features,
)
from .gibbs import gibbs_discrete
from .proposal import conditional_proposal_std

__all__ = [
    "INIT_CONDITIONAL_MEAN",
    "INIT_OBSERVED",
    "ChainConfig",
    "MoGConditional",
    "NullSamples",
    "conditional_proposal_std",
    "exact_mog_conditional",
    "gibbs_discrete",
    "load_matching_nulls",
    "load_null_samples",
    "mh_chain",
    "null_cache_path",
    "sample_null_features",
    "save_null_samples",
]
