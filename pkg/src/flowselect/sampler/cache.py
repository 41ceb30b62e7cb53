"""FSNS per-feature null-sample caches for resumable testing runs.

Header: version, N, K, feature index (u32 each); payload: the N*K sample
matrix; trailing CRC32. Acceptance rates are not persisted, so loaded
NullSamples carry acceptance_rate=None.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..container import MAGIC_NULLS, read_container, write_container
from ..errors import ConfigError, InvalidInputError
from .chains import NullSamples

FORMAT_VERSION = 1


def null_cache_path(directory: str | Path, j: int) -> Path:
    return Path(directory) / f"nulls_feature_{j:05d}.fsns"


def save_null_samples(nulls: NullSamples, path: str | Path) -> None:
    n, k = nulls.samples.shape
    write_container(
        path,
        MAGIC_NULLS,
        (FORMAT_VERSION, n, k, nulls.feature_index),
        [nulls.samples],
    )


def load_null_samples(path: str | Path) -> NullSamples:
    header, arrays = read_container(path, MAGIC_NULLS, 4)
    version, n, k, j = header
    if version != FORMAT_VERSION:
        raise InvalidInputError(f"unsupported null-cache version {version}")
    if len(arrays) != 1 or arrays[0].size != n * k:
        raise InvalidInputError(f"{path}: null cache payload does not match header")
    return NullSamples(
        feature_index=int(j),
        samples=arrays[0].reshape(int(n), int(k)),
        acceptance_rate=None,
    )


def load_matching_nulls(
    directory: str | Path, j: int, n_rows: int, n_samples: int
) -> NullSamples | None:
    """Load feature j's cache if present; None when absent.

    A cache with at least n_samples columns for the right row count is
    truncated to the first n_samples draws (chains with a common seed
    share prefixes, so this reproduces a shorter run exactly). Any other
    shape mismatch is a configuration error.
    """
    path = null_cache_path(directory, j)
    if not path.exists():
        return None
    nulls = load_null_samples(path)
    if nulls.feature_index != j:
        raise ConfigError(f"{path}: cache holds feature {nulls.feature_index}, not {j}")
    n, k = nulls.samples.shape
    if n != n_rows or k < n_samples:
        raise ConfigError(
            f"{path}: cache shape ({n}, {k}) incompatible with requested ({n_rows}, >={n_samples})"
        )
    if k > n_samples:
        nulls = NullSamples(
            feature_index=j,
            samples=nulls.samples[:, :n_samples].copy(),
            acceptance_rate=None,
        )
    return nulls
