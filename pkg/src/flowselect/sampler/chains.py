"""Metropolis-Hastings sampling from a joint model's complete conditionals.

For feature j the chain at observation i targets p(x_j | x_{i,-j})
under the supplied joint log-density, using a Gaussian random-walk
proposal. The proposal is symmetric, so the acceptance ratio reduces to
the density ratio; everything runs in log space. Chains for all
observations advance in lockstep so each step costs one batched
log-density evaluation, while the noise driving each chain comes from a
per-(row, feature) counter-based stream, making every chain individually
reproducible and row-permutation equivariant.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..errors import ConfigError, InvalidInputError, NumericError
from ..rng import TAG_CHAIN, stream

JointLogDensity = Callable[[np.ndarray], np.ndarray]

INIT_OBSERVED = "observed_value"
INIT_CONDITIONAL_MEAN = "conditional_mean"


@dataclass
class ChainConfig:
    n_samples: int = 500
    burn_in: int = 100
    thinning: int = 1
    proposal_scale_multiplier: float = 1.0
    seed: int = 0
    init: str = INIT_OBSERVED

    def __post_init__(self):
        if self.n_samples < 1:
            raise ConfigError("n_samples must be >= 1")
        if self.burn_in < 0:
            raise ConfigError("burn_in must be >= 0")
        if self.thinning < 1:
            raise ConfigError("thinning must be >= 1")
        if self.proposal_scale_multiplier <= 0:
            raise ConfigError("proposal_scale_multiplier must be positive")
        if self.init not in (INIT_OBSERVED, INIT_CONDITIONAL_MEAN):
            raise ConfigError(f"unknown init mode {self.init!r}")

    @property
    def n_steps(self) -> int:
        return self.burn_in + self.n_samples * self.thinning


@dataclass
class NullSamples:
    feature_index: int
    samples: np.ndarray  # (N, K)
    acceptance_rate: Optional[np.ndarray]  # (N,), None when loaded from cache

    def __post_init__(self):
        if not np.isfinite(self.samples).all():
            raise NumericError("null samples contain non-finite values")
        if self.acceptance_rate is not None and (
            np.any(self.acceptance_rate < 0) or np.any(self.acceptance_rate > 1)
        ):
            raise NumericError("acceptance rates must lie in [0, 1]")


def _advance_chains(
    x_rows: np.ndarray,
    j: int,
    log_density: JointLogDensity,
    proposal_std: float,
    config: ChainConfig,
    noise: np.ndarray,
    log_unif: np.ndarray,
    init_values: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Run all rows' chains in lockstep; returns (samples (N, K), acc (N,))."""
    n = x_rows.shape[0]
    work = np.array(x_rows, dtype=np.float64, copy=True)
    current = init_values.astype(np.float64).copy()
    work[:, j] = current
    logp = np.asarray(log_density(work), dtype=np.float64)
    if not np.isfinite(logp).all():
        bad = int(np.flatnonzero(~np.isfinite(logp))[0])
        raise NumericError(
            f"non-finite log-density at the initial chain state (row {bad}, feature {j})"
        )
    samples = np.empty((n, config.n_samples))
    accepted = np.zeros(n)
    kept = 0
    for step in range(config.n_steps):
        proposal = current + proposal_std * noise[:, step]
        work[:, j] = proposal
        logp_prop = np.asarray(log_density(work), dtype=np.float64)
        # symmetric proposal: log r = log p(prop) - log p(current)
        accept = log_unif[:, step] < (logp_prop - logp)
        current = np.where(accept, proposal, current)
        logp = np.where(accept, logp_prop, logp)
        work[:, j] = current
        accepted += accept
        past_burn_in = step - config.burn_in + 1
        if past_burn_in >= 1 and past_burn_in % config.thinning == 0:
            samples[:, kept] = current
            kept += 1
    assert kept == config.n_samples
    return samples, accepted / config.n_steps


def _draw_chain_noise(
    seed: int, row_ids: np.ndarray, j: int, n_steps: int
) -> tuple[np.ndarray, np.ndarray]:
    """Pre-draw each row's proposal noise and log-uniforms from its own
    (seed, row_id, feature) stream."""
    n = row_ids.shape[0]
    noise = np.empty((n, n_steps))
    log_unif = np.empty((n, n_steps))
    for pos, rid in enumerate(row_ids):
        gen = stream(seed, TAG_CHAIN, int(rid), j)
        noise[pos] = gen.standard_normal(n_steps)
        with np.errstate(divide="ignore"):
            log_unif[pos] = np.log(gen.random(n_steps))
    return noise, log_unif


def mh_chain(
    x_row: np.ndarray,
    j: int,
    log_density: JointLogDensity,
    proposal_std: float,
    config: ChainConfig,
    row_id: int = 0,
) -> tuple[np.ndarray, float]:
    """Sample K null values of feature j for a single observation.

    Returns (samples (K,), acceptance rate over all steps).
    """
    x_row = np.asarray(x_row, dtype=np.float64)
    if x_row.ndim != 1:
        raise InvalidInputError("x_row must be a single observation vector")
    if not np.isfinite(x_row).all():
        raise InvalidInputError("non-finite observation vector")
    if proposal_std <= 0:
        raise InvalidInputError("proposal_std must be positive")
    sigma = proposal_std * config.proposal_scale_multiplier
    noise, log_unif = _draw_chain_noise(config.seed, np.array([row_id]), j, config.n_steps)
    samples, acc = _advance_chains(
        x_row[None, :], j, log_density, sigma, config, noise, log_unif,
        init_values=x_row[None, j].copy(),
    )
    return samples[0], float(acc[0])


def sample_null_features(
    x: np.ndarray,
    j: int,
    log_density: JointLogDensity,
    config: ChainConfig,
    covariance: np.ndarray | None = None,
    mean: np.ndarray | None = None,
    row_ids: np.ndarray | None = None,
    chunk_rows: int = 8192,
) -> NullSamples:
    """Null draws of feature j for every row of x, one chain per row.

    covariance (with mean, for conditional-mean initialization) should be
    the training-split estimate; when omitted it is estimated from x
    itself. row_ids keys each row's RNG stream; by default row p uses id
    p, and passing the original indices of permuted rows reproduces the
    unpermuted chains row for row.
    """
    from .proposal import conditional_proposal_std

    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise InvalidInputError(f"expected (N, D) matrix, got {x.shape}")
    n, d = x.shape
    if not (0 <= j < d):
        raise InvalidInputError(f"feature index {j} outside 0..{d - 1}")
    if row_ids is None:
        row_ids = np.arange(n)
    row_ids = np.asarray(row_ids)
    if row_ids.shape != (n,):
        raise InvalidInputError("row_ids must align with the rows of x")
    if covariance is None:
        covariance = np.cov(x, rowvar=False).reshape(d, d)
    sigma = config.proposal_scale_multiplier * conditional_proposal_std(covariance, j)

    if config.init == INIT_CONDITIONAL_MEAN:
        mu = np.asarray(mean) if mean is not None else x.mean(axis=0)
        init_all = _gaussian_conditional_mean(x, j, covariance, mu)
    else:
        init_all = x[:, j].copy()

    samples = np.empty((n, config.n_samples))
    acc = np.empty(n)
    for start in range(0, n, chunk_rows):
        stop = min(start + chunk_rows, n)
        noise, log_unif = _draw_chain_noise(
            config.seed, row_ids[start:stop], j, config.n_steps
        )
        s, a = _advance_chains(
            x[start:stop], j, log_density, sigma, config, noise, log_unif,
            init_values=init_all[start:stop],
        )
        samples[start:stop] = s
        acc[start:stop] = a
    return NullSamples(feature_index=j, samples=samples, acceptance_rate=acc)


def _gaussian_conditional_mean(
    x: np.ndarray, j: int, covariance: np.ndarray, mean: np.ndarray
) -> np.ndarray:
    d = x.shape[1]
    if d == 1:
        return np.full(x.shape[0], mean[0])
    keep = np.arange(d) != j
    sub = covariance[np.ix_(keep, keep)].copy()
    ridge = 1e-6 * float(np.trace(covariance)) / d
    sub[np.diag_indices(d - 1)] += ridge
    w = np.linalg.solve(sub, covariance[j, keep])
    return mean[j] + (x[:, keep] - mean[keep]) @ w
