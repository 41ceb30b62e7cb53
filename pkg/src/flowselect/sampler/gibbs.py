"""Exact Gibbs draws for finite-support features.

With a handful of category codes the conditional can be enumerated:
evaluate the joint log-density at every candidate value of feature j,
normalize, and draw i.i.d. samples. Acceptance rate is 1 by construction
and consecutive samples are uncorrelated.
"""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateConditionalError, InvalidInputError
from ..rng import TAG_GIBBS, stream
from .chains import JointLogDensity


def gibbs_discrete(
    x_row: np.ndarray,
    j: int,
    log_density: JointLogDensity,
    support: np.ndarray,
    n_samples: int,
    seed: int,
    row_id: int = 0,
) -> np.ndarray:
    """Draw n_samples i.i.d. values of feature j from its enumerated
    conditional given x_row[-j]."""
    x_row = np.asarray(x_row, dtype=np.float64)
    support = np.asarray(support, dtype=np.float64)
    if support.ndim != 1 or support.size == 0:
        raise InvalidInputError("support must be a non-empty 1-D array of codes")
    if x_row.ndim != 1:
        raise InvalidInputError("x_row must be a single observation vector")
    if n_samples < 1:
        raise InvalidInputError("n_samples must be >= 1")

    candidates = np.tile(x_row, (support.size, 1))
    candidates[:, j] = support
    logp = np.asarray(log_density(candidates), dtype=np.float64)
    logp = np.where(np.isnan(logp), -np.inf, logp)
    top = logp.max()
    if not np.isfinite(top):
        raise DegenerateConditionalError(
            f"conditional for feature {j} has no mass anywhere on its support"
        )
    weights = np.exp(logp - top)
    probs = weights / weights.sum()
    gen = stream(seed, TAG_GIBBS, int(row_id), j)
    return gen.choice(support, size=n_samples, p=probs)
