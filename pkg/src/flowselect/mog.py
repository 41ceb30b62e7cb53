"""Equicorrelated Gaussian-mixture ground truth.

Provides the synthetic feature generator, the exact joint log-density
(usable as an oracle target for the MH sampler in place of a fitted
flow), and the exact one-dimensional complete conditionals used to
validate the sampler.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve, solve_triangular
from scipy.special import ndtr

from .errors import ConfigError, InvalidInputError, NumericError
from .rng import TAG_FEATURES, stream

LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass
class MoGSpec:
    """Mixture of equicorrelated Gaussians: component k has mean
    component_means[k] * 1, unit variances, and off_diagonals[k] in every
    off-diagonal covariance cell."""

    weights: tuple[float, ...]
    component_means: tuple[float, ...]
    off_diagonals: tuple[float, ...]
    dim: int
    _chols: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        self.weights = tuple(float(w) for w in self.weights)
        self.component_means = tuple(float(m) for m in self.component_means)
        self.off_diagonals = tuple(float(r) for r in self.off_diagonals)
        k = len(self.weights)
        if not (len(self.component_means) == len(self.off_diagonals) == k):
            raise ConfigError("weights, means and off-diagonals must align")
        if abs(sum(self.weights) - 1.0) > 1e-8 or min(self.weights) < 0:
            raise ConfigError("mixture weights must be non-negative and sum to 1")
        if self.dim < 1:
            raise ConfigError("dim must be >= 1")
        lower = -1.0 / (self.dim - 1) if self.dim > 1 else -np.inf
        for rho in self.off_diagonals:
            if not lower < rho < 1.0:
                raise ConfigError(
                    f"off-diagonal {rho} leaves the covariance non positive definite"
                )
        self._chols = [np.linalg.cholesky(self.covariance(i)) for i in range(k)]

    @property
    def n_components(self) -> int:
        return len(self.weights)

    def covariance(self, k: int) -> np.ndarray:
        rho = self.off_diagonals[k]
        cov = np.full((self.dim, self.dim), rho)
        np.fill_diagonal(cov, 1.0)
        return cov

    def mean_vector(self, k: int) -> np.ndarray:
        return np.full(self.dim, self.component_means[k])

    # ---- joint density --------------------------------------------------

    def log_density(self, x: np.ndarray) -> np.ndarray | float:
        """Joint mixture log-density; accepts (D,) or (N, D)."""
        x = np.asarray(x, dtype=np.float64)
        squeeze = x.ndim == 1
        x = np.atleast_2d(x)
        if x.shape[1] != self.dim:
            raise InvalidInputError(f"expected {self.dim} columns, got {x.shape[1]}")
        parts = np.empty((x.shape[0], self.n_components))
        for k in range(self.n_components):
            chol = self._chols[k]
            diff = x - self.component_means[k]
            sol = _tri_solve(chol, diff)
            quad = (sol * sol).sum(axis=1)
            logdet = 2.0 * np.log(np.diag(chol)).sum()
            parts[:, k] = (
                np.log(self.weights[k] + 1e-300)
                - 0.5 * (quad + logdet + self.dim * LOG_2PI)
            )
        top = parts.max(axis=1)
        out = top + np.log(np.exp(parts - top[:, None]).sum(axis=1))
        return float(out[0]) if squeeze else out

    def sample(self, n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
        """Draw n rows; returns (X, component labels)."""
        rng = stream(seed, TAG_FEATURES)
        labels = rng.choice(self.n_components, size=n, p=np.asarray(self.weights))
        eps = rng.standard_normal((n, self.dim))
        x = np.empty((n, self.dim))
        for k in range(self.n_components):
            rows = labels == k
            x[rows] = self.component_means[k] + eps[rows] @ self._chols[k].T
        return x, labels


def gen_mog_features(spec: MoGSpec, n: int, seed: int) -> np.ndarray:
    """Synthetic feature matrix drawn i.i.d. from the mixture."""
    return spec.sample(n, seed)[0]


@dataclass
class MoGConditional:
    """Exact 1-D conditional of one coordinate given the rest: a scalar
    Gaussian mixture with posterior component weights."""

    component_weights: np.ndarray
    means: np.ndarray
    stds: np.ndarray

    def __post_init__(self):
        if abs(self.component_weights.sum() - 1.0) > 1e-12:
            raise NumericError("conditional component weights must sum to 1")
        if np.any(self.stds <= 0):
            raise NumericError("conditional stds must be positive")

    def pdf(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        z = (t[..., None] - self.means) / self.stds
        comp = np.exp(-0.5 * z * z) / (self.stds * np.sqrt(2 * np.pi))
        return comp @ self.component_weights

    def log_pdf(self, t: np.ndarray) -> np.ndarray:
        return np.log(self.pdf(t) + 1e-300)

    def cdf(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        z = (t[..., None] - self.means) / self.stds
        return ndtr(z) @ self.component_weights

    def mean(self) -> float:
        return float(self.component_weights @ self.means)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        labels = rng.choice(len(self.component_weights), size=n, p=self.component_weights)
        return self.means[labels] + self.stds[labels] * rng.standard_normal(n)


def exact_mog_conditional(spec: MoGSpec, x_minus_j: np.ndarray, j: int) -> MoGConditional:
    """Exact conditional of coordinate j given the remaining coordinates.

    Component k's posterior weight is proportional to
    pi_k * N(x_minus_j; mu_k[-j], Sigma_k[-j,-j]); its conditional mean and
    variance follow from standard Gaussian conditioning.
    """
    x_minus_j = np.asarray(x_minus_j, dtype=np.float64)
    if not (0 <= j < spec.dim):
        raise InvalidInputError(f"feature index {j} outside 0..{spec.dim - 1}")
    if x_minus_j.shape != (spec.dim - 1,):
        raise InvalidInputError(
            f"x_minus_j must have length {spec.dim - 1}, got {x_minus_j.shape}"
        )
    if not np.isfinite(x_minus_j).all():
        raise InvalidInputError("non-finite conditioning values")

    n_comp = spec.n_components
    log_w = np.empty(n_comp)
    means = np.empty(n_comp)
    stds = np.empty(n_comp)
    keep = np.arange(spec.dim) != j
    for k in range(n_comp):
        cov = spec.covariance(k)
        mu = spec.mean_vector(k)
        if spec.dim == 1:
            log_w[k] = np.log(spec.weights[k] + 1e-300)
            means[k] = mu[0]
            stds[k] = np.sqrt(cov[0, 0])
            continue
        sub = cov[np.ix_(keep, keep)]
        cross = cov[j, keep]
        diff = x_minus_j - mu[keep]
        try:
            chol = np.linalg.cholesky(sub)
        except np.linalg.LinAlgError as exc:
            raise NumericError(f"singular conditioning covariance in component {k}") from exc
        sol = _tri_solve(chol, diff[None, :])[0]
        w_vec = _chol_solve(chol, cross)
        quad = float(sol @ sol)
        logdet = 2.0 * float(np.log(np.diag(chol)).sum())
        log_w[k] = (
            np.log(spec.weights[k] + 1e-300)
            - 0.5 * (quad + logdet + (spec.dim - 1) * LOG_2PI)
        )
        means[k] = mu[j] + float(w_vec @ diff)
        var = float(cov[j, j] - w_vec @ cross)
        stds[k] = np.sqrt(max(var, 1e-300))
    log_w -= log_w.max()
    w = np.exp(log_w)
    w /= w.sum()
    return MoGConditional(component_weights=w, means=means, stds=stds)


def _tri_solve(chol: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """Solve chol @ y = rows.T for y, returning row-shaped solutions."""
    return solve_triangular(chol, rows.T, lower=True).T


def _chol_solve(chol: np.ndarray, b: np.ndarray) -> np.ndarray:
    return cho_solve((chol, True), b)
