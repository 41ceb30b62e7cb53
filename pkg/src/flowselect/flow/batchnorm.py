"""Invertible batch normalization between masked autoregressive layers.

Training mode normalizes with batch statistics (so the map, and hence the
likelihood, is a deterministic function of the batch); evaluation mode
always uses running statistics so densities are deterministic. The gain
is stored as log_gamma to keep it positive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInputError


@dataclass
class BatchNormParams:
    log_gamma: np.ndarray
    beta: np.ndarray
    running_mean: np.ndarray
    running_var: np.ndarray
    momentum: float = 0.1
    eps: float = 1e-5

    def __post_init__(self):
        if self.eps <= 0:
            raise InvalidInputError("batch-norm eps must be positive")
        if not 0.0 < self.momentum < 1.0:
            raise InvalidInputError("batch-norm momentum must lie in (0, 1)")
        if np.any(self.running_var < 0):
            raise InvalidInputError("running_var must be non-negative")

    @property
    def dim(self) -> int:
        return self.log_gamma.shape[0]

    @property
    def scale(self) -> np.ndarray:
        return np.exp(self.log_gamma)

    def copy(self) -> "BatchNormParams":
        return BatchNormParams(
            log_gamma=self.log_gamma.copy(),
            beta=self.beta.copy(),
            running_mean=self.running_mean.copy(),
            running_var=self.running_var.copy(),
            momentum=self.momentum,
            eps=self.eps,
        )


def init_batchnorm_params(dim: int, momentum: float = 0.1, eps: float = 1e-5) -> BatchNormParams:
    return BatchNormParams(
        log_gamma=np.zeros(dim),
        beta=np.zeros(dim),
        running_mean=np.zeros(dim),
        running_var=np.ones(dim),
        momentum=momentum,
        eps=eps,
    )


def batchnorm_forward(x: np.ndarray, params: BatchNormParams, training: bool, want_cache: bool = False):
    """Normalize (N, D) inputs; returns (y, log_det[, cache]).

    log_det per row = sum_j (log_gamma_j - 0.5 * log(var_j + eps)).
    Running statistics are NOT updated here; the trainer applies momentum
    updates from cache['batch_mean'/'batch_var'] to keep this pure.
    """
    x = np.asarray(x, dtype=np.float64)
    if training:
        mean = x.mean(axis=0)
        var = x.var(axis=0)  # population variance: duplication-invariant
    else:
        mean = params.running_mean
        var = params.running_var
    inv_std = 1.0 / np.sqrt(var + params.eps)
    x_hat = (x - mean) * inv_std
    gamma = np.exp(params.log_gamma)
    y = gamma * x_hat + params.beta
    log_det_row = float((params.log_gamma - 0.5 * np.log(var + params.eps)).sum())
    log_det = np.full(x.shape[0], log_det_row)
    if not want_cache:
        return y, log_det
    cache = {
        "x": x,
        "x_hat": x_hat,
        "inv_std": inv_std,
        "gamma": gamma,
        "training": training,
        "batch_mean": mean,
        "batch_var": var,
    }
    return y, log_det, cache


def batchnorm_backward(params: BatchNormParams, cache: dict, g_y: np.ndarray, g_log_det: np.ndarray):
    """Backprop through batchnorm_forward; returns (g_x, grads)."""
    x = cache["x"]
    x_hat = cache["x_hat"]
    inv_std = cache["inv_std"]
    gamma = cache["gamma"]
    n = x.shape[0]
    gld_total = g_log_det.sum()

    grads = {
        "log_gamma": (g_y * x_hat * gamma).sum(axis=0) + gld_total,
        "beta": g_y.sum(axis=0),
    }
    g_x_hat = g_y * gamma
    if not cache["training"]:
        return g_x_hat * inv_std, grads

    # Batch statistics depend on x: combine the standard batch-norm
    # backward with the -0.5*log(var+eps) term of the log determinant.
    centered = x - cache["batch_mean"]
    g_var = (
        (g_x_hat * centered).sum(axis=0) * (-0.5) * inv_std**3
        - 0.5 * gld_total * inv_std**2
    )
    g_mean = -(g_x_hat.sum(axis=0)) * inv_std
    g_x = g_x_hat * inv_std + g_var * 2.0 * centered / n + g_mean / n
    return g_x, grads


def batchnorm_inverse(y: np.ndarray, params: BatchNormParams) -> np.ndarray:
    """Evaluation-mode inverse using running statistics."""
    std = np.sqrt(params.running_var + params.eps)
    return (y - params.beta) / np.exp(params.log_gamma) * std + params.running_mean
