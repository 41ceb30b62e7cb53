"""Three-step selection pipeline: flow fit, conditional null sampling,
holdout testing with multiplicity correction.

The expensive response-independent work (split, flow, covariance, null
samples) lives in a PipelineState so experiment replicates can reuse it;
run_pipeline composes preparation and testing for a single response.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from ..errors import ConfigError, InvalidInputError, StageError
from ..flow import FlowArchitecture, FlowModel, TrainConfig, train_flow
from ..mog import MoGSpec
from ..models import (
    ForestConfig,
    MlpConfig,
    fit_lasso_cv,
    fit_mlp,
    fit_random_forest,
)
from ..rng import TAG_SPLIT, stream
from ..sampler import (
    ChainConfig,
    NullSamples,
    load_matching_nulls,
    null_cache_path,
    sample_null_features,
    save_null_samples,
)
from .report import TestReport
from .selection import bh_select, by_select
from .statistics import empirical_pvalue, null_statistics, observed_statistic

logger = logging.getLogger(__name__)

STATISTIC_LASSO = "lasso"
STATISTIC_FOREST = "forest"
STATISTIC_MLP = "mlp"


@dataclass
class PipelineConfig:
    seed: int = 0
    train_fraction: float = 0.5
    n_null_samples: int = 500
    burn_in: int = 100
    thinning: int = 1
    proposal_scale_multiplier: float = 1.0
    chain_init: str = "observed_value"
    gamma: float = 0.1
    correction: str = "bh"
    statistic: str = STATISTIC_LASSO
    flow_train: TrainConfig = field(default_factory=TrainConfig)
    flow_arch: FlowArchitecture = field(default_factory=FlowArchitecture)
    lasso_folds: int = 5
    lasso_grid_size: int = 100
    forest: ForestConfig = field(default_factory=ForestConfig)
    mlp: MlpConfig = field(default_factory=MlpConfig)
    oracle_conditional: MoGSpec | None = None
    null_cache_dir: str | Path | None = None
    threads: int = 1
    feature_names: list[str] | None = None

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError("train_fraction must lie in (0, 1)")
        if self.correction not in ("bh", "by"):
            raise ConfigError(f"unknown correction {self.correction!r}")
        if self.statistic not in (STATISTIC_LASSO, STATISTIC_FOREST, STATISTIC_MLP):
            raise ConfigError(f"unknown statistic {self.statistic!r}")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")

    def chain_config(self) -> ChainConfig:
        return ChainConfig(
            n_samples=self.n_null_samples,
            burn_in=self.burn_in,
            thinning=self.thinning,
            proposal_scale_multiplier=self.proposal_scale_multiplier,
            seed=self.seed,
            init=self.chain_init,
        )


@dataclass
class PipelineState:
    """Response-independent artifacts shared across replicates."""

    config: PipelineConfig
    train_rows: np.ndarray
    test_rows: np.ndarray
    x_train: np.ndarray
    x_test: np.ndarray
    flow: FlowModel | None
    log_density: Callable[[np.ndarray], np.ndarray]
    covariance: np.ndarray
    train_mean: np.ndarray
    nulls: dict[int, NullSamples] = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.x_test.shape[1]

    def null_samples_for(self, j: int) -> NullSamples:
        """Sample (or load) feature j's nulls, memoized and disk-cached."""
        if j in self.nulls:
            return self.nulls[j]
        cfg = self.config
        cache_dir = cfg.null_cache_dir
        if cache_dir is not None:
            cached = load_matching_nulls(cache_dir, j, self.x_test.shape[0], cfg.n_null_samples)
            if cached is not None:
                logger.info("feature %d: loaded null samples from cache", j)
                self.nulls[j] = cached
                return cached
        nulls = sample_null_features(
            self.x_test,
            j,
            self.log_density,
            cfg.chain_config(),
            covariance=self.covariance,
            mean=self.train_mean,
            row_ids=self.test_rows,
        )
        if cache_dir is not None:
            Path(cache_dir).mkdir(parents=True, exist_ok=True)
            save_null_samples(nulls, null_cache_path(cache_dir, j))
        self.nulls[j] = nulls
        return nulls


def split_rows(n: int, train_fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    perm = stream(seed, TAG_SPLIT).permutation(n)
    n_train = int(round(n * train_fraction))
    if n_train < 2 or n - n_train < 2:
        raise InvalidInputError(f"split leaves too few rows (n={n}, train={n_train})")
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


def prepare_pipeline(
    x: np.ndarray,
    config: PipelineConfig,
    flow: FlowModel | None = None,
) -> PipelineState:
    """Run the response-independent stages: split, flow fit (unless a
    trained flow or an oracle density is supplied), covariance estimate."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise InvalidInputError(f"expected (N, D) features, got {x.shape}")
    timings: dict = {}

    t0 = time.perf_counter()
    train_rows, test_rows = _stage("split", split_rows, x.shape[0], config.train_fraction, config.seed)
    x_train, x_test = x[train_rows], x[test_rows]
    timings["split"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    if config.oracle_conditional is not None:
        if config.oracle_conditional.dim != x.shape[1]:
            raise ConfigError("oracle mixture dimension does not match the data")
        flow = None
        log_density = config.oracle_conditional.log_density
    elif flow is not None:
        if flow.dim != x.shape[1]:
            raise ConfigError(
                f"checkpoint dimension {flow.dim} does not match data dimension {x.shape[1]}"
            )
        log_density = flow.log_density
    else:
        train_cfg = replace(config.flow_train, seed=config.seed)
        result = _stage("flow", train_flow, x_train, train_cfg, config.flow_arch)
        flow = result.model
        log_density = flow.log_density
    timings["flow"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    covariance = np.cov(x_train, rowvar=False).reshape(x.shape[1], x.shape[1])
    timings["covariance"] = time.perf_counter() - t0
    return PipelineState(
        config=config,
        train_rows=train_rows,
        test_rows=test_rows,
        x_train=x_train,
        x_test=x_test,
        flow=flow,
        log_density=log_density,
        covariance=covariance,
        train_mean=x_train.mean(axis=0),
        timings=timings,
    )


def fit_statistic_model(state: PipelineState, y_train: np.ndarray):
    cfg = state.config
    if cfg.statistic == STATISTIC_LASSO:
        return fit_lasso_cv(
            state.x_train, y_train, folds=cfg.lasso_folds, seed=cfg.seed,
            grid_size=cfg.lasso_grid_size,
        )
    if cfg.statistic == STATISTIC_FOREST:
        return fit_random_forest(state.x_train, y_train, replace(cfg.forest, seed=cfg.seed))
    return fit_mlp(state.x_train, y_train, replace(cfg.mlp, seed=cfg.seed))


def test_with_response(state: PipelineState, y: np.ndarray, model=None) -> TestReport:
    """Steps 2-3 for one response vector, reusing the state's null draws."""
    cfg = state.config
    y = np.asarray(y, dtype=np.float64).ravel()
    if y.shape[0] != state.train_rows.size + state.test_rows.size:
        raise InvalidInputError("response length does not match the feature matrix")
    y_train, y_test = y[state.train_rows], y[state.test_rows]
    timings = dict(state.timings)

    t0 = time.perf_counter()
    if model is None:
        model = _stage("model", fit_statistic_model, state, y_train)
    timings["model"] = time.perf_counter() - t0

    t_star = _stage("statistics", observed_statistic, model, state.x_test, y_test)

    d = state.dim
    t0 = time.perf_counter()

    def feature_pvalue(j: int) -> tuple[float, float | None]:
        def work():
            nulls = state.null_samples_for(j)
            t_null = null_statistics(model, state.x_test, y_test, j, nulls)
            rate = None
            if nulls.acceptance_rate is not None:
                rate = float(nulls.acceptance_rate.mean())
            return empirical_pvalue(t_star, t_null), rate

        return _stage(f"nulls[feature {j}]", work)

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(feature_pvalue, range(d)))
    else:
        results = [feature_pvalue(j) for j in range(d)]
    p_values = np.array([r[0] for r in results])
    rates = np.array([np.nan if r[1] is None else r[1] for r in results])
    timings["nulls_and_statistics"] = time.perf_counter() - t0

    select = bh_select if cfg.correction == "bh" else by_select
    threshold, selected = _stage("selection", select, p_values, cfg.gamma)
    names = cfg.feature_names or [f"x{j}" for j in range(d)]
    return TestReport(
        feature_ids=list(names),
        observed_statistic=t_star,
        p_values=p_values,
        selected=selected,
        threshold=threshold,
        gamma=cfg.gamma,
        correction=cfg.correction,
        n_null_samples=cfg.n_null_samples,
        seeds={"seed": cfg.seed},
        timings={k: round(v, 4) for k, v in timings.items()},
        acceptance_rates=rates,
    )


def run_pipeline(
    x: np.ndarray,
    y: np.ndarray,
    config: PipelineConfig,
    flow: FlowModel | None = None,
) -> TestReport:
    """Full three-step run for a single dataset and response."""
    state = prepare_pipeline(x, config, flow=flow)
    return test_with_response(state, y)


def _stage(name: str, fn, *args):
    try:
        return fn(*args)
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, str(exc)) from exc
