"""FSFL checkpoint files: header (version, D, M, layer count) + tensors.

Tensor order per model: standardizer mean/std; gauss bypass flag, mu,
log_s; then per MAF-chain entry either a MADE block (layout descriptor,
hidden W/b pairs, w_mu, b_mu, w_alpha, b_alpha) or a batch-norm block
(log_gamma, beta, running_mean, running_var, [momentum, eps]). MADE and
batch-norm entries alternate, MADE first, so types are positional.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..container import MAGIC_FLOW, read_container, write_container
from ..errors import InvalidInputError
from .batchnorm import BatchNormParams
from .gaussianize import GaussLayerParams
from .made import MadeLayerParams, build_masks
from .model import FlowModel
from .standardizer import Standardizer

FORMAT_VERSION = 1


def save_checkpoint(model: FlowModel, path: str | Path) -> None:
    arrays: list[np.ndarray] = [
        model.standardizer.mean,
        model.standardizer.std,
        np.array([1.0 if model.gauss_bypass else 0.0]),
        model.gauss.mu,
        model.gauss.log_s,
    ]
    for layer in model.maf_layers:
        if isinstance(layer, MadeLayerParams):
            arrays.append(np.array([float(h) for h in layer.hidden_sizes], dtype=np.float64))
            for w, b in zip(layer.hidden_weights, layer.hidden_biases):
                arrays.extend([w, b])
            arrays.extend([layer.w_mu, layer.b_mu, layer.w_alpha, layer.b_alpha])
        else:
            arrays.extend(
                [
                    layer.log_gamma,
                    layer.beta,
                    layer.running_mean,
                    layer.running_var,
                    np.array([layer.momentum, layer.eps]),
                ]
            )
    header = (FORMAT_VERSION, model.dim, model.gauss.n_clusters, len(model.maf_layers))
    write_container(path, MAGIC_FLOW, header, arrays)


def load_checkpoint(path: str | Path) -> FlowModel:
    header, arrays = read_container(path, MAGIC_FLOW, 4)
    version, dim, n_clusters, n_layers = header
    if version != FORMAT_VERSION:
        raise InvalidInputError(f"unsupported checkpoint version {version}")
    it = iter(arrays)

    def take(shape) -> np.ndarray:
        flat = next(it)
        size = int(np.prod(shape))
        if flat.size != size:
            raise InvalidInputError(
                f"checkpoint tensor has {flat.size} elements, expected {size}"
            )
        return flat.reshape(shape)

    standardizer = Standardizer(mean=take((dim,)), std=take((dim,)))
    gauss_bypass = bool(take((1,))[0])
    gauss = GaussLayerParams(mu=take((dim, n_clusters)), log_s=take((dim, n_clusters)))
    maf_layers: list = []
    for li in range(n_layers):
        if li % 2 == 0:  # MADE entries sit at even positions
            layout = next(it)
            hidden = tuple(int(round(h)) for h in layout)
            masks = build_masks(dim, hidden)
            widths = (dim, *hidden)
            hw, hb = [], []
            for fan_in, fan_out in zip(widths[:-1], widths[1:]):
                hw.append(take((fan_in, fan_out)))
                hb.append(take((fan_out,)))
            last = widths[-1]
            maf_layers.append(
                MadeLayerParams(
                    hidden_weights=hw,
                    hidden_biases=hb,
                    w_mu=take((last, dim)),
                    b_mu=take((dim,)),
                    w_alpha=take((last, dim)),
                    b_alpha=take((dim,)),
                    masks=masks,
                )
            )
        else:
            log_gamma = take((dim,))
            beta = take((dim,))
            running_mean = take((dim,))
            running_var = take((dim,))
            momentum, eps = take((2,))
            maf_layers.append(
                BatchNormParams(
                    log_gamma=log_gamma,
                    beta=beta,
                    running_mean=running_mean,
                    running_var=running_var,
                    momentum=float(momentum),
                    eps=float(eps),
                )
            )
    leftover = sum(1 for _ in it)
    if leftover:
        raise InvalidInputError(f"checkpoint has {leftover} unexpected trailing tensors")
    return FlowModel(
        standardizer=standardizer,
        gauss=gauss,
        maf_layers=maf_layers,
        dim=int(dim),
        gauss_bypass=gauss_bypass,
    )


def describe_checkpoint(path: str | Path) -> dict:
    """Header summary used by the inspect-checkpoint command (also verifies CRC)."""
    header, arrays = read_container(path, MAGIC_FLOW, 4)
    version, dim, n_clusters, n_layers = header
    return {
        "magic": "FSFL",
        "version": int(version),
        "dim": int(dim),
        "n_clusters": int(n_clusters),
        "n_maf_layers": int(n_layers),
        "n_tensors": len(arrays),
        "n_parameters": int(sum(a.size for a in arrays)),
        "crc32": "ok",
    }
