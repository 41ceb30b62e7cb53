"""Binary persistence for predictive models (magics FSLA, FSRF, FSNN).

All three reuse the shared length-prefixed container; headers carry
(version, n_features, ...) and structure descriptors ride along as f64
layout arrays, mirroring the flow checkpoint format.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..container import MAGIC_FOREST, MAGIC_LASSO, MAGIC_MLP, read_container, write_container
from ..errors import InvalidInputError
from .forest import ForestConfig, ForestModel, Tree
from .lasso import LassoModel
from .mlp import MlpModel

FORMAT_VERSION = 1


def save_lasso(model: LassoModel, path: str | Path) -> None:
    curve = np.asarray(model.cv_curve, dtype=np.float64).reshape(-1, 2)
    write_container(
        path,
        MAGIC_LASSO,
        (FORMAT_VERSION, model.beta.shape[0], int(model.converged)),
        [
            model.beta,
            np.array([model.intercept, model.lambda_selected]),
            curve,
        ],
    )


def load_lasso(path: str | Path) -> LassoModel:
    header, arrays = read_container(path, MAGIC_LASSO, 3)
    version, d, converged = header
    if version != FORMAT_VERSION:
        raise InvalidInputError(f"unsupported lasso container version {version}")
    beta, scalars, curve = arrays[0], arrays[1], arrays[2].reshape(-1, 2)
    return LassoModel(
        beta=beta.reshape(d),
        intercept=float(scalars[0]),
        lambda_selected=float(scalars[1]),
        cv_curve=[(float(l), float(m)) for l, m in curve],
        converged=bool(converged),
    )


def save_forest(model: ForestModel, path: str | Path) -> None:
    arrays: list[np.ndarray] = [np.array([float(len(t.feature)) for t in model.trees])]
    for t in model.trees:
        arrays.extend(
            [t.feature.astype(np.float64), t.threshold, t.left.astype(np.float64),
             t.right.astype(np.float64), t.value]
        )
    write_container(
        path,
        MAGIC_FOREST,
        (FORMAT_VERSION, model.n_features, len(model.trees), model.config.seed),
        arrays,
    )


def load_forest(path: str | Path) -> ForestModel:
    header, arrays = read_container(path, MAGIC_FOREST, 4)
    version, d, n_trees, seed = header
    if version != FORMAT_VERSION:
        raise InvalidInputError(f"unsupported forest container version {version}")
    sizes = arrays[0].astype(int)
    trees = []
    pos = 1
    for size in sizes:
        feature, threshold, left, right, value = arrays[pos : pos + 5]
        pos += 5
        trees.append(
            Tree(
                feature=feature.astype(np.int32).reshape(size),
                threshold=threshold.reshape(size),
                left=left.astype(np.int32).reshape(size),
                right=right.astype(np.int32).reshape(size),
                value=value.reshape(size),
            )
        )
    if len(trees) != n_trees:
        raise InvalidInputError("forest container tree count mismatch")
    return ForestModel(trees=trees, n_features=int(d), config=ForestConfig(seed=int(seed)))


def save_mlp(model: MlpModel, path: str | Path) -> None:
    layout = np.array([w.shape[1] for w in model.weights[:-1]], dtype=np.float64)
    has_standardizer = model.input_mean is not None
    arrays = [layout, np.array([model.dropout_rate, float(has_standardizer)])]
    if has_standardizer:
        arrays.extend([model.input_mean, model.input_std])
    for w, b in zip(model.weights, model.biases):
        arrays.extend([w, b])
    write_container(path, MAGIC_MLP, (FORMAT_VERSION, model.n_features), arrays)


def load_mlp(path: str | Path) -> MlpModel:
    header, arrays = read_container(path, MAGIC_MLP, 2)
    version, d = header
    if version != FORMAT_VERSION:
        raise InvalidInputError(f"unsupported MLP container version {version}")
    it = iter(arrays)
    hidden = tuple(int(round(h)) for h in next(it))
    dropout_rate, has_standardizer = next(it)
    mean = std = None
    if has_standardizer:
        mean, std = next(it), next(it)
    widths = (int(d), *hidden, 1)
    weights, biases = [], []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        weights.append(next(it).reshape(fan_in, fan_out))
        biases.append(next(it).reshape(fan_out))
    return MlpModel(
        weights=weights,
        biases=biases,
        dropout_rate=float(dropout_rate),
        input_mean=mean,
        input_std=std,
    )
