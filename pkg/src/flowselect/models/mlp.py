"""Feed-forward regression network trained with mean-squared error.

ReLU between dense layers, inverted dropout on the input and after each
hidden layer during training, and the same adaptive-moment optimizer as
flow training. Early stopping keeps the best-validation parameters.
Evaluation-mode prediction is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidInputError, NumericError
from ..optim import Adam
from ..rng import TAG_MODEL, stream


@dataclass
class MlpConfig:
    hidden_sizes: tuple[int, ...] = (64, 128, 64)
    dropout_rate: float = 0.2
    learning_rate: float = 1e-5
    epochs: int = 200
    batch_size: int = 128
    validation_fraction: float = 0.15
    patience: int = 25
    seed: int = 0
    standardize_inputs: bool = True

    def __post_init__(self):
        if not 0.0 <= self.dropout_rate < 1.0:
            raise InvalidInputError("dropout_rate must lie in [0, 1)")
        if self.learning_rate <= 0 or self.epochs < 1 or self.batch_size < 1:
            raise InvalidInputError("bad MLP training configuration")


@dataclass
class MlpModel:
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    dropout_rate: float = 0.0
    input_mean: np.ndarray | None = None
    input_std: np.ndarray | None = None

    @property
    def n_features(self) -> int:
        return self.weights[0].shape[0]

    def _prepare(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.n_features:
            raise InvalidInputError(f"expected (N, {self.n_features}) features, got {x.shape}")
        if self.input_mean is not None:
            x = (x - self.input_mean) / self.input_std
        return x

    def predict(self, x: np.ndarray) -> np.ndarray:
        h = self._prepare(x)
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w + b
            if i < last:
                h = np.maximum(h, 0.0)
        return h[:, 0]

    def copy_params(self) -> tuple[list[np.ndarray], list[np.ndarray]]:
        return [w.copy() for w in self.weights], [b.copy() for b in self.biases]


def init_mlp(
    n_features: int, hidden_sizes: tuple[int, ...], rng: np.random.Generator, dropout_rate: float = 0.0
) -> MlpModel:
    widths = (n_features, *hidden_sizes, 1)
    weights, biases = [], []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        weights.append(rng.standard_normal((fan_in, fan_out)) * np.sqrt(2.0 / fan_in))
        biases.append(np.zeros(fan_out))
    return MlpModel(weights=weights, biases=biases, dropout_rate=dropout_rate)


def _forward_train(model: MlpModel, x: np.ndarray, rng: np.random.Generator):
    """Training-mode forward with dropout masks; returns (pred, cache)."""
    keep = 1.0 - model.dropout_rate
    acts = []
    masks = []
    h = x
    if model.dropout_rate > 0:
        mask = (rng.random(h.shape) < keep) / keep
        h = h * mask
    else:
        mask = None
    last = len(model.weights) - 1
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        acts.append(h)
        masks.append(mask)
        h = h @ w + b
        if i < last:
            h = np.maximum(h, 0.0)
            if model.dropout_rate > 0:
                mask = (rng.random(h.shape) < keep) / keep
                h = h * mask
            else:
                mask = None
    return h[:, 0], {"acts": acts, "masks": masks}


def _loss_and_grads(model: MlpModel, x: np.ndarray, y: np.ndarray, rng: np.random.Generator):
    pred, cache = _forward_train(model, x, rng)
    n = x.shape[0]
    err = pred - y
    loss = float((err * err).mean())
    g = (2.0 / n) * err[:, None]
    grads_w: list[np.ndarray] = [None] * len(model.weights)
    grads_b: list[np.ndarray] = [None] * len(model.biases)
    last = len(model.weights) - 1
    for i in range(last, -1, -1):
        h_in = cache["acts"][i]
        grads_w[i] = h_in.T @ g
        grads_b[i] = g.sum(axis=0)
        if i > 0:
            g = g @ model.weights[i].T
            post = cache["acts"][i]  # dropout-scaled relu output
            g = g * (post > 0.0)
            if cache["masks"][i] is not None:
                g = g * cache["masks"][i]
    return loss, grads_w, grads_b


def fit_mlp(x: np.ndarray, y: np.ndarray, config: MlpConfig | None = None) -> MlpModel:
    """Train with early stopping; returns the best-validation parameters."""
    config = config or MlpConfig()
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    n = x.shape[0]
    if n < 2 * config.batch_size:
        raise InvalidInputError(f"need at least {2 * config.batch_size} rows, got {n}")

    split_rng = stream(config.seed, TAG_MODEL, 2)
    perm = split_rng.permutation(n)
    n_val = max(1, int(round(n * config.validation_fraction)))
    val_idx, train_idx = perm[:n_val], perm[n_val:]

    model = init_mlp(x.shape[1], config.hidden_sizes, stream(config.seed, TAG_MODEL, 3), config.dropout_rate)
    if config.standardize_inputs:
        model.input_mean = x[train_idx].mean(axis=0)
        model.input_std = np.maximum(x[train_idx].std(axis=0), 1e-12)
    xt = model._prepare(x[train_idx])
    yt = y[train_idx]

    opt = Adam(config.learning_rate)
    params = {f"w{i}": w for i, w in enumerate(model.weights)}
    params |= {f"b{i}": b for i, b in enumerate(model.biases)}
    train_rng = stream(config.seed, TAG_MODEL, 4)
    best_val = np.inf
    best_params = model.copy_params()
    stale = 0
    for epoch in range(config.epochs):
        order = train_rng.permutation(xt.shape[0])
        n_batches = max(1, xt.shape[0] // config.batch_size)
        for b in range(n_batches):
            rows = order[b * config.batch_size : (b + 1) * config.batch_size]
            loss, gw, gb = _loss_and_grads(model, xt[rows], yt[rows], train_rng)
            if not np.isfinite(loss):
                raise NumericError(f"MLP loss diverged at epoch {epoch}, batch {b}")
            grads = {f"w{i}": g for i, g in enumerate(gw)}
            grads |= {f"b{i}": g for i, g in enumerate(gb)}
            opt.step(params, grads)
        val_pred = model.predict(x[val_idx])
        val_mse = float(((val_pred - y[val_idx]) ** 2).mean())
        if val_mse < best_val - 1e-12:
            best_val = val_mse
            best_params = model.copy_params()
            stale = 0
        else:
            stale += 1
            if stale >= config.patience:
                break
    model.weights, model.biases = best_params
    return model
