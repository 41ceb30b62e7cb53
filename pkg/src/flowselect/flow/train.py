"""Two-phase maximum-likelihood training of the flow.

Phase 1 fits the marginal Gaussianization clusters alone; phase 2 trains
the whole architecture jointly. The returned model carries the parameters
with the best validation NLL seen during phase 2, guarding against
late-run divergence.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidInputError, NumericError
from ..optim import Adam
from ..rng import TAG_FLOW, stream
from .gaussianize import LOG_2PI, gauss_forward
from .model import FlowArchitecture, FlowModel, build_flow

logger = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    epochs_phase1: int = 100
    epochs_phase2: int = 100
    learning_rate: float = 1e-3
    batch_size: int = 256
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0
    validation_fraction: float = 0.1

    def __post_init__(self):
        if self.epochs_phase1 < 1 or self.epochs_phase2 < 1:
            raise InvalidInputError("epoch counts must be >= 1")
        if self.learning_rate <= 0:
            raise InvalidInputError("learning_rate must be positive")
        if self.batch_size < 2:
            raise InvalidInputError("batch_size must be >= 2")
        if not 0.0 < self.validation_fraction < 1.0:
            raise InvalidInputError("validation_fraction must lie in (0, 1)")


@dataclass
class EpochRecord:
    epoch: int
    phase: int
    train_nll: float
    val_nll: float


@dataclass
class TrainResult:
    model: FlowModel
    history: list[EpochRecord]
    best_epoch: int
    best_val_nll: float


def train_flow(
    data: np.ndarray,
    config: TrainConfig,
    arch: FlowArchitecture | None = None,
) -> TrainResult:
    """Fit the flow to (N, D) data; deterministic given config.seed."""
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2:
        raise InvalidInputError(f"expected (N, D) data, got shape {data.shape}")
    n, dim = data.shape
    if n < 2 * config.batch_size:
        raise InvalidInputError(
            f"need at least 2*batch_size={2 * config.batch_size} rows, got {n}"
        )
    arch = arch or FlowArchitecture()

    split_rng = stream(config.seed, TAG_FLOW, 0)
    perm = split_rng.permutation(n)
    n_val = max(1, int(round(n * config.validation_fraction)))
    val_idx, train_idx = perm[:n_val], perm[n_val:]
    x_train, x_val = data[train_idx], data[val_idx]

    model = build_flow(dim, arch, init_data=x_train, seed=config.seed)
    shuffle_rng = stream(config.seed, TAG_FLOW, 1)
    history: list[EpochRecord] = []

    def run_phase(phase: int, epochs: int) -> tuple[FlowModel, int, float]:
        gauss_only = phase == 1
        opt = Adam(config.learning_rate, config.beta1, config.beta2, config.adam_eps)
        all_params = model.parameters()
        if gauss_only:
            params = {k: v for k, v in all_params.items() if k.startswith("gauss.")}
        else:
            params = all_params
        best_val = np.inf
        best_snapshot = model.copy()
        best_epoch = -1
        n_train = x_train.shape[0]
        for epoch in range(epochs):
            order = shuffle_rng.permutation(n_train)
            n_batches = n_train // config.batch_size  # drop ragged tail
            total = 0.0
            for b in range(n_batches):
                rows = order[b * config.batch_size : (b + 1) * config.batch_size]
                try:
                    nll, grads, batch_stats = model.loss_and_gradients(
                        data[train_idx[rows]], gauss_only=gauss_only
                    )
                except NumericError as exc:
                    raise NumericError(
                        f"{exc} (phase {phase}, epoch {epoch}, batch {b})"
                    ) from exc
                if not np.isfinite(nll):
                    raise NumericError(
                        f"non-finite training loss at phase {phase}, epoch {epoch}, batch {b}"
                    )
                opt.step(params, {k: grads[k] for k in params})
                model.update_running_stats(batch_stats)
                total += nll
            train_nll = total / max(n_batches, 1)
            val_nll = _mean_nll(model, x_val, gauss_only=gauss_only)
            history.append(EpochRecord(len(history), phase, train_nll, val_nll))
            if val_nll < best_val:
                best_val = val_nll
                best_snapshot = model.copy()
                best_epoch = len(history) - 1
        return best_snapshot, best_epoch, best_val

    _, _, phase1_val = run_phase(1, config.epochs_phase1)
    logger.info("phase 1 done: best marginal val NLL %.4f", phase1_val)
    best_model, best_epoch, best_val = run_phase(2, config.epochs_phase2)
    logger.info("phase 2 done: best val NLL %.4f at epoch %d", best_val, best_epoch)
    best_model.training_history = history
    return TrainResult(
        model=best_model, history=history, best_epoch=best_epoch, best_val_nll=best_val
    )


def _mean_nll(model: FlowModel, x: np.ndarray, gauss_only: bool = False) -> float:
    if gauss_only:
        z = model.standardizer.forward(x)
        log_det = np.full(z.shape[0], model.standardizer.log_det_row)
        if not model.gauss_bypass:
            z, ld = gauss_forward(z, model.gauss)
            log_det += ld
        lp = -0.5 * (z * z).sum(axis=1) - 0.5 * model.dim * LOG_2PI + log_det
        return float(-lp.mean())
    return float(-model.log_density(x).mean())


def write_metrics_csv(history: list[EpochRecord], path) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "phase", "train_nll", "val_nll"])
        for rec in history:
            writer.writerow([rec.epoch, rec.phase, f"{rec.train_nll:.8f}", f"{rec.val_nll:.8f}"])
