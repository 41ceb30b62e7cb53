"""The composed flow: standardizer -> Gaussianization -> MADE/batch-norm chain.

All public evaluation entry points (flow_forward, log_density) run in
evaluation mode and are pure; the training-mode forward/backward pair is
used only by the trainer and the gradient checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidInputError, NumericError
from .batchnorm import (
    BatchNormParams,
    batchnorm_backward,
    batchnorm_forward,
    batchnorm_inverse,
    init_batchnorm_params,
)
from .gaussianize import (
    LOG_2PI,
    GaussLayerParams,
    gauss_backward,
    gauss_forward,
    gauss_inverse,
    init_gauss_params,
)
from .made import (
    MadeLayerParams,
    init_made_params,
    made_backward,
    made_forward,
    made_inverse,
)
from .standardizer import Standardizer


@dataclass
class FlowArchitecture:
    """Structural knobs; defaults mirror the desk-scale architecture."""

    n_clusters: int = 6
    n_maf_layers: int = 5
    hidden_sizes: tuple[int, ...] = (100, 100, 100)
    bn_momentum: float = 0.1
    bn_eps: float = 1e-5
    gauss_bypass: bool = False


@dataclass
class FlowModel:
    standardizer: Standardizer
    gauss: GaussLayerParams
    maf_layers: list  # alternating MadeLayerParams / BatchNormParams
    dim: int
    gauss_bypass: bool = False
    training_history: list = field(default_factory=list, repr=False)

    # ---- parameter registry ------------------------------------------------

    def parameters(self) -> dict[str, np.ndarray]:
        """Named views of every trainable tensor, in declaration order."""
        params = {"gauss.mu": self.gauss.mu, "gauss.log_s": self.gauss.log_s}
        for li, layer in enumerate(self.maf_layers):
            if isinstance(layer, MadeLayerParams):
                for wi, (w, b) in enumerate(zip(layer.hidden_weights, layer.hidden_biases)):
                    params[f"maf{li}.w{wi}"] = w
                    params[f"maf{li}.b{wi}"] = b
                params[f"maf{li}.w_mu"] = layer.w_mu
                params[f"maf{li}.b_mu"] = layer.b_mu
                params[f"maf{li}.w_alpha"] = layer.w_alpha
                params[f"maf{li}.b_alpha"] = layer.b_alpha
            else:
                params[f"maf{li}.log_gamma"] = layer.log_gamma
                params[f"maf{li}.beta"] = layer.beta
        return params

    def copy(self) -> "FlowModel":
        return FlowModel(
            standardizer=self.standardizer.copy(),
            gauss=self.gauss.copy(),
            maf_layers=[layer.copy() for layer in self.maf_layers],
            dim=self.dim,
            gauss_bypass=self.gauss_bypass,
        )

    # ---- evaluation-mode interface ------------------------------------------

    def forward(self, x: np.ndarray):
        """Map raw inputs to base space; returns (z, log_det) with the
        standardizer Jacobian included in log_det."""
        x2, squeeze = _as_batch(x, self.dim)
        if not np.isfinite(x2).all():
            raise InvalidInputError("non-finite input to flow")
        z = self.standardizer.forward(x2)
        log_det = np.full(z.shape[0], self.standardizer.log_det_row)
        if not self.gauss_bypass:
            z, ld = gauss_forward(z, self.gauss)
            log_det += ld
            _check_finite(z, "gaussianization")
        for li, layer in enumerate(self.maf_layers):
            if isinstance(layer, MadeLayerParams):
                z, ld = made_forward(z, layer)
            else:
                z, ld = batchnorm_forward(z, layer, training=False)
            log_det += ld
            _check_finite(z, f"maf layer {li}")
        return (z[0], float(log_det[0])) if squeeze else (z, log_det)

    def log_density(self, x: np.ndarray):
        """log p(x) under the flow; accepts (D,) or (N, D)."""
        x2, squeeze = _as_batch(x, self.dim)
        z, log_det = self.forward(x2)
        lp = -0.5 * (z * z).sum(axis=1) - 0.5 * self.dim * LOG_2PI + log_det
        return float(lp[0]) if squeeze else lp

    def inverse(self, z: np.ndarray) -> np.ndarray:
        z2, squeeze = _as_batch(z, self.dim)
        x = z2
        for layer in reversed(self.maf_layers):
            if isinstance(layer, MadeLayerParams):
                x = made_inverse(x, layer)
            else:
                x = batchnorm_inverse(x, layer)
        if not self.gauss_bypass:
            x = gauss_inverse(x, self.gauss)
        x = self.standardizer.inverse(x)
        return x[0] if squeeze else x

    def sample(self, n: int, seed: int) -> np.ndarray:
        """Draw n rows by inverse-transforming base-distribution samples."""
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed))
        z = rng.standard_normal((n, self.dim))
        return self.inverse(z)

    # ---- training-mode interface ---------------------------------------------

    def forward_train(self, x: np.ndarray, gauss_only: bool = False):
        """Training-mode forward keeping per-layer caches for the backward."""
        z = self.standardizer.forward(np.asarray(x, dtype=np.float64))
        log_det = np.full(z.shape[0], self.standardizer.log_det_row)
        caches: list = []
        if not self.gauss_bypass:
            z, ld, cache = gauss_forward(z, self.gauss, want_cache=True)
            log_det += ld
            caches.append(("gauss", cache))
        if not gauss_only:
            for li, layer in enumerate(self.maf_layers):
                if isinstance(layer, MadeLayerParams):
                    z, ld, cache = made_forward(z, layer, want_cache=True)
                    caches.append((f"maf{li}", cache))
                else:
                    z, ld, cache = batchnorm_forward(z, layer, training=True, want_cache=True)
                    caches.append((f"maf{li}", cache))
                log_det += ld
        return z, log_det, caches

    def loss_and_gradients(self, batch: np.ndarray, gauss_only: bool = False):
        """Mean negative log-likelihood of the batch and analytic gradients
        for every trainable tensor (keys match parameters()).

        Pure: batch-norm layers run on batch statistics but running
        statistics are not touched; the per-layer batch moments are
        returned for the trainer to fold in.
        """
        batch = np.asarray(batch, dtype=np.float64)
        if batch.ndim != 2 or batch.shape[1] != self.dim:
            raise InvalidInputError(f"expected (N, {self.dim}) batch, got {batch.shape}")
        if not np.isfinite(batch).all():
            raise InvalidInputError("non-finite values in training batch")
        n = batch.shape[0]
        z, log_det, caches = self.forward_train(batch, gauss_only=gauss_only)
        if not (np.isfinite(z).all() and np.isfinite(log_det).all()):
            raise NumericError("non-finite values in training forward pass")
        nll = float(-(-0.5 * (z * z).sum(axis=1) - 0.5 * self.dim * LOG_2PI + log_det).mean())

        # d nll / dz = z / n ; per-row weight on every log_det term = -1/n.
        g_z = z / n
        g_log_det = np.full(n, -1.0 / n)
        grads: dict[str, np.ndarray] = {}
        batch_stats: dict[str, tuple[np.ndarray, np.ndarray]] = {}
        layer_index = {f"maf{li}": li for li in range(len(self.maf_layers))}
        for name, cache in reversed(caches):
            if name == "gauss":
                g_z, g_mu, g_log_s = gauss_backward(cache, g_z, g_log_det)
                grads["gauss.mu"] = g_mu
                grads["gauss.log_s"] = g_log_s
            else:
                layer = self.maf_layers[layer_index[name]]
                if isinstance(layer, MadeLayerParams):
                    g_z, layer_grads = made_backward(layer, cache, g_z, g_log_det)
                else:
                    g_z, layer_grads = batchnorm_backward(layer, cache, g_z, g_log_det)
                    batch_stats[name] = (cache["batch_mean"], cache["batch_var"])
                for key, val in layer_grads.items():
                    grads[f"{name}.{key}"] = val
        return nll, grads, batch_stats

    def update_running_stats(self, batch_stats: dict) -> None:
        for name, (mean, var) in batch_stats.items():
            layer = self.maf_layers[int(name.removeprefix("maf"))]
            m = layer.momentum
            layer.running_mean *= 1.0 - m
            layer.running_mean += m * mean
            layer.running_var *= 1.0 - m
            layer.running_var += m * var


def build_flow(
    dim: int,
    arch: FlowArchitecture,
    init_data: np.ndarray | None = None,
    seed: int = 0,
) -> FlowModel:
    """Construct an untrained flow. If init_data is given, the standardizer
    and Gaussianization clusters are initialized from it."""
    if init_data is not None:
        standardizer = Standardizer.fit(init_data)
        gauss = init_gauss_params(standardizer.forward(init_data), arch.n_clusters)
    else:
        standardizer = Standardizer.identity(dim)
        gauss = init_gauss_params(
            np.linspace(-3, 3, 101)[:, None] * np.ones(dim)[None, :], arch.n_clusters
        )
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(2,)))
    maf_layers: list = []
    for i in range(arch.n_maf_layers):
        maf_layers.append(init_made_params(dim, arch.hidden_sizes, rng))
        if i < arch.n_maf_layers - 1:
            maf_layers.append(init_batchnorm_params(dim, arch.bn_momentum, arch.bn_eps))
    return FlowModel(
        standardizer=standardizer,
        gauss=gauss,
        maf_layers=maf_layers,
        dim=dim,
        gauss_bypass=arch.gauss_bypass,
    )


def _as_batch(x: np.ndarray, dim: int) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        if x.shape[0] != dim:
            raise InvalidInputError(f"expected length-{dim} vector, got {x.shape}")
        return x[None, :], True
    if x.ndim != 2 or x.shape[1] != dim:
        raise InvalidInputError(f"expected (N, {dim}) array, got {x.shape}")
    return x, False


def _check_finite(z: np.ndarray, where: str) -> None:
    if not np.isfinite(z).all():
        raise NumericError(f"non-finite intermediate values in {where}")
