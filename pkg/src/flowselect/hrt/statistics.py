"""Holdout feature statistics and the empirical p-value.

The statistic is the negative test mean-squared error of the fitted
predictive model. Null statistics swap one held-out column for each null
draw, never refitting the model; the p-value counts null statistics at or
above the observed one, with the +1 in numerator and denominator keeping
the estimate valid at finite K. Counting ties as exceedances is what
keeps the p-value superuniform: a model that ignores a feature ties every
null draw exactly and must yield p = 1, not the minimum attainable value.
"""

from __future__ import annotations

import numpy as np

from ..errors import InvalidInputError
from ..sampler.chains import NullSamples


def neg_mse_statistic(model, x: np.ndarray, y: np.ndarray) -> float:
    """-mean((f(X) - Y)^2); higher means a better fit."""
    y = np.asarray(y, dtype=np.float64).ravel()
    pred = model.predict(x)
    if pred.shape != y.shape:
        raise InvalidInputError(f"predictions {pred.shape} do not match targets {y.shape}")
    diff = pred - y
    return float(-(diff @ diff) / y.shape[0])


def observed_statistic(model, x_test: np.ndarray, y_test: np.ndarray) -> float:
    """The shared observed statistic T*: identical for every feature, so it
    is computed once from the untouched test split."""
    return neg_mse_statistic(model, x_test, y_test)


def null_statistics(
    model,
    x_test: np.ndarray,
    y_test: np.ndarray,
    j: int,
    null_samples: NullSamples,
) -> np.ndarray:
    """Statistic value for each null draw swapped into column j; (K,).

    Computed as T* plus the paired difference
        T_k - T* = -mean((p_k - p) * (p_k + p - 2y)),
    which is exactly zero whenever the swapped predictions coincide with
    the observed ones (e.g. the model ignores feature j). Forming T_k
    independently instead would let reduction-order rounding break those
    exact ties in an arbitrary direction, which the tie-counting p-value
    must not be exposed to.
    """
    x_test = np.asarray(x_test, dtype=np.float64)
    y = np.asarray(y_test, dtype=np.float64).ravel()
    if null_samples.feature_index != j:
        raise InvalidInputError(
            f"null samples are for feature {null_samples.feature_index}, not {j}"
        )
    if null_samples.samples.shape[0] != x_test.shape[0]:
        raise InvalidInputError("null sample rows do not match the test rows")
    columns = null_samples.samples
    t_star = neg_mse_statistic(model, x_test, y)
    pred_obs = model.predict(x_test)
    if hasattr(model, "predict_column_swaps"):
        preds = model.predict_column_swaps(x_test, j, columns)
    else:
        preds = np.empty_like(columns)
        swapped = x_test.copy()
        for k in range(columns.shape[1]):
            swapped[:, j] = columns[:, k]
            preds[:, k] = model.predict(swapped)
    diff = preds - pred_obs[:, None]
    delta = -(diff * (preds + pred_obs[:, None] - 2.0 * y[:, None])).mean(axis=0)
    return t_star + delta


def empirical_pvalue(t_star: float, t_null: np.ndarray) -> float:
    """(1 + #{k : T_k >= T*}) / (K + 1); ties count as exceedances."""
    t_null = np.asarray(t_null, dtype=np.float64)
    if t_null.ndim != 1 or t_null.size < 1:
        raise InvalidInputError("need at least one null statistic")
    exceed = int((t_null >= t_star).sum())
    return (1 + exceed) / (t_null.size + 1)
