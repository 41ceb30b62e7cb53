"""Predictive models backing the holdout feature statistic."""

from .forest import ForestConfig, ForestModel, Tree, fit_random_forest
from .lasso import LassoModel, default_lambda_grid, fit_lasso_at, fit_lasso_cv, lambda_max
from .mlp import MlpConfig, MlpModel, fit_mlp, init_mlp
from .serialize import load_forest, load_lasso, load_mlp, save_forest, save_lasso, save_mlp

__all__ = [
    "ForestConfig",
    "ForestModel",
    "LassoModel",
    "MlpConfig",
    "MlpModel",
    "Tree",
    "default_lambda_grid",
    "fit_lasso_at",
    "fit_lasso_cv",
    "fit_mlp",
    "fit_random_forest",
    "init_mlp",
    "lambda_max",
    "load_forest",
    "load_lasso",
    "load_mlp",
    "save_forest",
    "save_lasso",
    "save_mlp",
]
