"""YAML run configuration.

One file drives every command; sections: dataset.*, flow.*, mcmc.*,
model.*, test.*, replicate.*, plus top-level seed/output_dir. Unknown
keys and type mismatches are reported with their full key path. The
resolved form is a plain dict (the manifest snapshot) that re-resolves
to itself.
"""

from __future__ import annotations

import copy
import os
from pathlib import Path
from typing import Any

import yaml

from ..errors import ConfigError, InvalidInputError
from ..flow import FlowArchitecture, TrainConfig
from ..hrt import PipelineConfig
from ..mog import MoGSpec
from ..models import ForestConfig, MlpConfig

SEED_ENV_VAR = "FLOWSELECT_SEED"

DEFAULTS: dict[str, Any] = {
    "seed": 0,
    "output_dir": "flowselect_run",
    "threads": 0,  # 0 = use available parallelism
    "dataset": {
        "features_csv": None,
        "response_csv": None,
        "synthetic": None,  # {weights, means, off_diagonals, dim, n_rows}
        "normalize_unit_interval": False,
        "normalize_noise_std": 0.0,
        "top_correlated": None,
        "correlation_method": "max_abs",
    },
    "flow": {
        "n_clusters": 6,
        "n_maf_layers": 5,
        "hidden_sizes": [100, 100, 100],
        "epochs_phase1": 100,
        "epochs_phase2": 100,
        "learning_rate": 1e-3,
        "batch_size": 256,
        "validation_fraction": 0.1,
        "checkpoint": None,
    },
    "mcmc": {
        "k": 500,
        "burn_in": 100,
        "thinning": 1,
        "proposal_scale_multiplier": 1.0,
        "init": "observed_value",
    },
    "model": {
        "statistic": "lasso",
        "lasso": {"folds": 5, "grid_size": 100},
        "forest": {
            "n_trees": 100,
            "max_depth": None,
            "min_samples_leaf": 5,
            "features_per_split": None,
        },
        "mlp": {
            "hidden_sizes": [64, 128, 64],
            "dropout": 0.2,
            "learning_rate": 1e-5,
            "epochs": 200,
            "batch_size": 128,
        },
    },
    "test": {
        "gamma": 0.1,
        "correction": "bh",
        "train_fraction": 0.5,
        "oracle_conditional": False,
    },
    "replicate": {
        "n_replicates": 10,
        "gammas": [0.05, 0.1, 0.25],
        "response_mode": "linear",
        "response_noise_std": 1.0,
        "sparsity": 0.8,
    },
}


def load_config(path: str | Path) -> dict:
    path = Path(path)
    if not path.exists():
        raise InvalidInputError(f"config file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise InvalidInputError(f"{path}: invalid YAML: {exc}") from None
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise InvalidInputError(f"{path}: config must be a mapping")
    return resolve_config(raw)


def resolve_config(raw: dict) -> dict:
    """Merge user keys over defaults, rejecting unknown keys with their path,
    then apply the FLOWSELECT_SEED override."""
    resolved = _merge(copy.deepcopy(DEFAULTS), raw, path="")
    env_seed = os.environ.get(SEED_ENV_VAR)
    if env_seed is not None:
        try:
            resolved["seed"] = int(env_seed)
        except ValueError:
            raise ConfigError(f"{SEED_ENV_VAR}={env_seed!r} is not an integer") from None
    _validate(resolved)
    return resolved


def _merge(base: Any, override: Any, path: str) -> Any:
    if isinstance(base, dict):
        if not isinstance(override, dict):
            raise ConfigError(f"config key '{path or '<root>'}' must be a mapping")
        for key, value in override.items():
            child = f"{path}.{key}" if path else key
            if key not in base:
                raise ConfigError(f"unknown config key '{child}'")
            if isinstance(base[key], dict) and base[key]:
                base[key] = _merge(base[key], value, child)
            else:
                base[key] = value
        return base
    return override


def _validate(cfg: dict) -> None:
    ds = cfg["dataset"]
    has_csv = ds["features_csv"] is not None
    has_synth = ds["synthetic"] is not None
    if has_csv and has_synth:
        raise ConfigError("dataset: set either 'features_csv' or 'synthetic', not both")
    if not has_csv and not has_synth:
        raise ConfigError("dataset: one of 'features_csv' or 'synthetic' is required")
    if has_synth:
        synth = ds["synthetic"]
        for key in ("weights", "means", "off_diagonals", "dim", "n_rows"):
            if not isinstance(synth, dict) or key not in synth:
                raise ConfigError(f"dataset.synthetic.{key} is required")
    if cfg["model"]["statistic"] not in ("lasso", "forest", "mlp"):
        raise ConfigError("model.statistic must be one of lasso, forest, mlp")
    if cfg["test"]["correction"] not in ("bh", "by"):
        raise ConfigError("test.correction must be 'bh' or 'by'")
    if cfg["mcmc"]["k"] < 1:
        raise ConfigError("mcmc.k must be >= 1")
    if cfg["test"]["oracle_conditional"] and not has_synth:
        raise ConfigError("test.oracle_conditional requires a synthetic dataset")


# ---- typed views -----------------------------------------------------------


def mog_spec(cfg: dict) -> MoGSpec | None:
    synth = cfg["dataset"]["synthetic"]
    if synth is None:
        return None
    return MoGSpec(
        weights=tuple(synth["weights"]),
        component_means=tuple(synth["means"]),
        off_diagonals=tuple(synth["off_diagonals"]),
        dim=int(synth["dim"]),
    )


def flow_arch(cfg: dict) -> FlowArchitecture:
    f = cfg["flow"]
    return FlowArchitecture(
        n_clusters=int(f["n_clusters"]),
        n_maf_layers=int(f["n_maf_layers"]),
        hidden_sizes=tuple(int(h) for h in f["hidden_sizes"]),
    )


def flow_train_config(cfg: dict) -> TrainConfig:
    f = cfg["flow"]
    return TrainConfig(
        epochs_phase1=int(f["epochs_phase1"]),
        epochs_phase2=int(f["epochs_phase2"]),
        learning_rate=float(f["learning_rate"]),
        batch_size=int(f["batch_size"]),
        seed=int(cfg["seed"]),
        validation_fraction=float(f["validation_fraction"]),
    )


def pipeline_config(cfg: dict, feature_names: list[str] | None = None) -> PipelineConfig:
    m = cfg["model"]
    forest = m["forest"]
    mlp = m["mlp"]
    return PipelineConfig(
        seed=int(cfg["seed"]),
        train_fraction=float(cfg["test"]["train_fraction"]),
        n_null_samples=int(cfg["mcmc"]["k"]),
        burn_in=int(cfg["mcmc"]["burn_in"]),
        thinning=int(cfg["mcmc"]["thinning"]),
        proposal_scale_multiplier=float(cfg["mcmc"]["proposal_scale_multiplier"]),
        chain_init=str(cfg["mcmc"]["init"]),
        gamma=float(cfg["test"]["gamma"]),
        correction=str(cfg["test"]["correction"]),
        statistic=str(m["statistic"]),
        flow_train=flow_train_config(cfg),
        flow_arch=flow_arch(cfg),
        lasso_folds=int(m["lasso"]["folds"]),
        lasso_grid_size=int(m["lasso"]["grid_size"]),
        forest=ForestConfig(
            n_trees=int(forest["n_trees"]),
            max_depth=None if forest["max_depth"] is None else int(forest["max_depth"]),
            min_samples_leaf=int(forest["min_samples_leaf"]),
            features_per_split=(
                None
                if forest["features_per_split"] is None
                else int(forest["features_per_split"])
            ),
        ),
        mlp=MlpConfig(
            hidden_sizes=tuple(int(h) for h in mlp["hidden_sizes"]),
            dropout_rate=float(mlp["dropout"]),
            learning_rate=float(mlp["learning_rate"]),
            epochs=int(mlp["epochs"]),
            batch_size=int(mlp["batch_size"]),
        ),
        oracle_conditional=mog_spec(cfg) if cfg["test"]["oracle_conditional"] else None,
        threads=int(cfg["threads"]) if cfg["threads"] else (os.cpu_count() or 1),
        feature_names=feature_names,
    )
