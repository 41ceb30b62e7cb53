"""Random-walk proposal scale from the empirical covariance.

The proposal standard deviation for feature j is the square root of the
Schur complement sigma_j^2 = S[j,j] - S[j,-j] S[-j,-j]^-1 S[-j,j], i.e.
the Gaussian conditional variance implied by the covariance estimate.
"""

from __future__ import annotations

import numpy as np

from ..errors import InvalidInputError

RIDGE_SCALE = 1e-6


def conditional_proposal_std(covariance: np.ndarray, j: int, ridge_scale: float = RIDGE_SCALE) -> float:
    """Gaussian conditional std of feature j; strictly positive.

    S[-j,-j] gets a ridge of ridge_scale * trace(S)/D before solving, which
    keeps near-singular empirical covariances (feature correlations ~0.98)
    numerically stable.
    """
    cov = np.asarray(covariance, dtype=np.float64)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise InvalidInputError(f"covariance must be square, got {cov.shape}")
    d = cov.shape[0]
    if not (0 <= j < d):
        raise InvalidInputError(f"feature index {j} outside 0..{d - 1}")
    if not np.allclose(cov, cov.T, rtol=1e-8, atol=1e-10):
        raise InvalidInputError("covariance must be symmetric")
    if np.any(np.diag(cov) <= 0):
        raise InvalidInputError("covariance diagonal must be positive")
    if d == 1:
        return float(np.sqrt(cov[0, 0]))
    keep = np.arange(d) != j
    sub = cov[np.ix_(keep, keep)].copy()
    ridge = ridge_scale * float(np.trace(cov)) / d
    sub[np.diag_indices(d - 1)] += ridge
    cross = cov[j, keep]
    var = float(cov[j, j] - cross @ np.linalg.solve(sub, cross))
    return float(np.sqrt(max(var, ridge)))
