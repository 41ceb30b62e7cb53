"""Normalizing-flow density model: Gaussianization + masked autoregressive flow."""

from .batchnorm import BatchNormParams, batchnorm_forward, init_batchnorm_params
from .checkpoint import describe_checkpoint, load_checkpoint, save_checkpoint
from .gaussianize import GaussLayerParams, gauss_forward, gauss_inverse, init_gauss_params
from .made import MadeLayerParams, build_masks, init_made_params, made_forward
from .model import FlowArchitecture, FlowModel, build_flow
from .standardizer import Standardizer
from .train import EpochRecord, TrainConfig, TrainResult, train_flow, write_metrics_csv

__all__ = [
    "BatchNormParams",
    "EpochRecord",
    "FlowArchitecture",
    "FlowModel",
    "GaussLayerParams",
    "MadeLayerParams",
    "Standardizer",
    "TrainConfig",
    "TrainResult",
    "batchnorm_forward",
    "build_flow",
    "build_masks",
    "describe_checkpoint",
    "gauss_forward",
    "gauss_inverse",
    "init_batchnorm_params",
    "init_gauss_params",
    "init_made_params",
    "load_checkpoint",
    "made_forward",
    "save_checkpoint",
    "train_flow",
    "write_metrics_csv",
]
