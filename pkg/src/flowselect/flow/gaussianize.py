"""Elementwise marginal Gaussianization layer.

Each coordinate is pushed through a learned mixture-of-sigmoids CDF and
then the probit, z = probit(mean_m sigmoid((x - mu_m) / s_m)), which is
strictly increasing and maps any continuous marginal toward N(0, 1).
The mixture CDF is averaged over clusters so its range is (0, 1), and
CDF values are clamped to [CDF_CLAMP, 1 - CDF_CLAMP] before the probit
so held-out tail points never produce infinite z.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit, ndtr, ndtri

from ..errors import InvalidInputError, NumericError

CDF_CLAMP = 1e-7
LOG_2PI = float(np.log(2.0 * np.pi))

# Bisection settings for the (monotone scalar) inverse.
_BISECT_MAX_ITER = 200
_BISECT_TOL = 1e-10


@dataclass
class GaussLayerParams:
    """Per-dimension, per-cluster locations and log-scales, shape (D, M)."""

    mu: np.ndarray
    log_s: np.ndarray

    def __post_init__(self):
        self.mu = np.asarray(self.mu, dtype=np.float64)
        self.log_s = np.asarray(self.log_s, dtype=np.float64)
        if self.mu.ndim != 2 or self.mu.shape != self.log_s.shape:
            raise InvalidInputError(
                f"mu/log_s must both be (D, M), got {self.mu.shape} and {self.log_s.shape}"
            )
        if self.mu.shape[1] < 1:
            raise InvalidInputError("need at least one mixture cluster")
        if not (np.isfinite(self.mu).all() and np.isfinite(self.log_s).all()):
            raise InvalidInputError("non-finite Gaussianization parameters")

    @property
    def dim(self) -> int:
        return self.mu.shape[0]

    @property
    def n_clusters(self) -> int:
        return self.mu.shape[1]

    def copy(self) -> "GaussLayerParams":
        return GaussLayerParams(self.mu.copy(), self.log_s.copy())


def init_gauss_params(x: np.ndarray, n_clusters: int) -> GaussLayerParams:
    """Quantile-based init: cluster locations at empirical quantiles of x.

    Scales start at the inter-quantile spacing so the mixture CDF already
    covers the data range; deterministic given the data.
    """
    x = np.asarray(x, dtype=np.float64)
    d = x.shape[1]
    qs = (np.arange(n_clusters) + 0.5) / n_clusters
    mu = np.quantile(x, qs, axis=0).T  # (D, M)
    span = np.maximum(x.max(axis=0) - x.min(axis=0), 1e-3)
    s = np.maximum(span / max(n_clusters, 2), 0.05)
    log_s = np.tile(np.log(s)[:, None], (1, n_clusters))
    return GaussLayerParams(mu=mu, log_s=log_s)


def _mixture_terms(x: np.ndarray, params: GaussLayerParams):
    """Shared forward quantities; x is (N, D).

    The mixture log-density is assembled in log space
    (log sigma'(t) = -softplus(t) - softplus(-t)) so the log determinant
    stays finite arbitrarily far into the tails. Everything derives from a
    single exp(-|t|) evaluation: sigmoid(t) = 1/(1+e) resp. e/(1+e), and
    softplus(t) + softplus(-t) = 2*log1p(e) + |t|.
    """
    s = np.exp(params.log_s)  # (D, M)
    t = (x[:, :, None] - params.mu[None]) / s[None]  # (N, D, M)
    abs_t = np.abs(t)
    e = np.exp(-abs_t)
    inv = 1.0 / (1.0 + e)
    sig = np.where(t >= 0, inv, e * inv)
    dsig = sig * (1.0 - sig)
    cdf = sig.mean(axis=2)  # (N, D)
    ell = -(2.0 * np.log1p(e) + abs_t) - params.log_s[None]  # log sigma'(t)/s
    ell_max = ell.max(axis=2)
    log_pdf = ell_max + np.log(np.exp(ell - ell_max[:, :, None]).sum(axis=2)) - np.log(t.shape[2])
    return s, t, sig, dsig, cdf, ell, log_pdf


def gauss_forward(
    x: np.ndarray, params: GaussLayerParams, want_cache: bool = False
):
    """Map (N, D) inputs to probit space.

    Returns (z, log_det) where log_det is the per-row sum of
    log |dG_j/dx_j|; with want_cache=True also returns the cache consumed
    by gauss_backward.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != params.dim:
        raise InvalidInputError(f"expected (N, {params.dim}) input, got {x.shape}")
    if not np.isfinite(x).all():
        raise InvalidInputError("non-finite input to Gaussianization layer")
    s, t, sig, dsig, cdf, ell, log_pdf = _mixture_terms(x, params)
    clipped = np.clip(cdf, CDF_CLAMP, 1.0 - CDF_CLAMP)
    z = ndtri(clipped)
    # log|dG/dx| = log pdf - log phi(z)
    log_det_elem = log_pdf + 0.5 * z * z + 0.5 * LOG_2PI
    log_det = log_det_elem.sum(axis=1)
    if not want_cache:
        return z, log_det
    cache = {
        "s": s,
        "t": t,
        "sig": sig,
        "dsig": dsig,
        "ell": ell,
        "log_pdf": log_pdf,
        "z": z,
        "unclipped": (cdf > CDF_CLAMP) & (cdf < 1.0 - CDF_CLAMP),
    }
    return z, log_det, cache


def gauss_backward(cache: dict, g_z: np.ndarray, g_log_det: np.ndarray):
    """Backpropagate through gauss_forward.

    g_z is dLoss/dz (N, D); g_log_det is the per-row weight on this
    layer's log_det contribution (N,). Returns (g_x, g_mu, g_log_s).
    """
    s = cache["s"]
    t = cache["t"]
    sig = cache["sig"]
    dsig = cache["dsig"]
    z = cache["z"]
    unclipped = cache["unclipped"]
    m = t.shape[2]

    # phi(z) = pdf of N(0,1); dz/dF = 1/phi(z), zero where the clamp bound.
    inv_phi = np.exp(0.5 * z * z + 0.5 * LOG_2PI)
    gl = g_log_det[:, None]
    # Loss reaches F both directly through z and through the 0.5 z^2 term
    # of log_det; it reaches log_pdf with weight g_log_det.
    g_cdf = (g_z + gl * z) * inv_phi * unclipped
    pdf = np.exp(cache["log_pdf"])

    # d log pdf / d(...) via softmax weights over the per-cluster terms.
    w = np.exp(cache["ell"] - cache["log_pdf"][:, :, None]) / m
    dlsig = 1.0 - 2.0 * sig  # d log sigma'(t) / dt
    g_x = g_cdf * pdf + gl * (w * dlsig / s[None]).sum(axis=2)

    gc = g_cdf[:, :, None]
    glp = gl[:, :, None] * w
    g_mu = (gc * (-dsig / s[None]) / m + glp * (-dlsig / s[None])).sum(axis=0)
    g_log_s = (gc * (-t * dsig) / m + glp * (-t * dlsig - 1.0)).sum(axis=0)
    return g_x, g_mu, g_log_s


def gauss_inverse(z: np.ndarray, params: GaussLayerParams) -> np.ndarray:
    """Invert the layer by per-element bisection (G is strictly increasing)."""
    z = np.asarray(z, dtype=np.float64)
    # Clamp targets just inside the forward clamp band, where G is
    # invertible; values beyond it were saturated by the forward pass and
    # have no preimage.
    lo_p = CDF_CLAMP * 1.01
    target = np.clip(ndtr(z), lo_p, 1.0 - lo_p)
    s = np.exp(params.log_s)
    lo = np.broadcast_to(
        (params.mu - 40.0 * s).min(axis=1)[None, :], z.shape
    ).copy()
    hi = np.broadcast_to(
        (params.mu + 40.0 * s).max(axis=1)[None, :], z.shape
    ).copy()

    def cdf_of(x):
        t = (x[:, :, None] - params.mu[None]) / s[None]
        return expit(t).mean(axis=2)

    # Expand brackets until they enclose every target (tails are flat, so a
    # few doublings suffice for clamped targets).
    for _ in range(60):
        bad_lo = cdf_of(lo) > target
        bad_hi = cdf_of(hi) < target
        if not (bad_lo.any() or bad_hi.any()):
            break
        width = hi - lo
        lo = np.where(bad_lo, lo - width, lo)
        hi = np.where(bad_hi, hi + width, hi)
    else:
        raise NumericError("could not bracket Gaussianization inverse")

    x = 0.5 * (lo + hi)
    for _ in range(_BISECT_MAX_ITER):
        val = cdf_of(x)
        go_right = val < target
        lo = np.where(go_right, x, lo)
        hi = np.where(go_right, hi, x)
        x = 0.5 * (lo + hi)
        if float((hi - lo).max()) < _BISECT_TOL:
            break
    else:
        raise NumericError(
            f"Gaussianization inverse did not converge within {_BISECT_MAX_ITER} bisections"
        )
    return x
