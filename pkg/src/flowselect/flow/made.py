"""Masked autoregressive layer: u_j = (x_j - mu_j(x_<j)) * exp(-alpha_j(x_<j)).

The shift/log-scale networks share one masked ReLU MLP with two linear
output heads. Masks follow a fixed sequential degree assignment (input
degree = index, hidden degrees cycle 1..D-1), so output coordinate j
depends on inputs with strictly smaller index and the Jacobian is lower
triangular with diagonal exp(-alpha_j); log |det| = -sum_j alpha_j.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError


def build_degrees(dim: int, hidden_sizes: tuple[int, ...]) -> list[np.ndarray]:
    """Degrees for input, each hidden layer, and output."""
    degrees = [np.arange(1, dim + 1)]
    cycle = max(dim - 1, 1)
    for h in hidden_sizes:
        degrees.append(np.arange(h) % cycle + 1)
    degrees.append(np.arange(1, dim + 1))
    return degrees


def build_masks(dim: int, hidden_sizes: tuple[int, ...]) -> list[np.ndarray]:
    """Binary masks, one per weight matrix (fan_in, fan_out) incl. output."""
    degrees = build_degrees(dim, hidden_sizes)
    masks = []
    for d_in, d_out in zip(degrees[:-2], degrees[1:-1]):
        masks.append((d_in[:, None] <= d_out[None, :]).astype(np.float64))
    # Output connections require strictly smaller degree.
    masks.append((degrees[-2][:, None] < degrees[-1][None, :]).astype(np.float64))
    return masks


@dataclass
class MadeLayerParams:
    """Weights/biases of the masked network plus its fixed masks."""

    hidden_weights: list[np.ndarray]
    hidden_biases: list[np.ndarray]
    w_mu: np.ndarray
    b_mu: np.ndarray
    w_alpha: np.ndarray
    b_alpha: np.ndarray
    masks: list[np.ndarray] = field(repr=False, default_factory=list)

    def __post_init__(self):
        if not self.masks:
            dim = self.b_mu.shape[0]
            hidden = tuple(w.shape[1] for w in self.hidden_weights)
            self.masks = build_masks(dim, hidden)
        shapes_ok = all(
            w.shape == m.shape for w, m in zip(self.hidden_weights, self.masks[:-1])
        ) and self.w_mu.shape == self.masks[-1].shape == self.w_alpha.shape
        if not shapes_ok:
            raise ConfigError("MADE weight/mask shapes are inconsistent")

    @property
    def dim(self) -> int:
        return self.b_mu.shape[0]

    @property
    def hidden_sizes(self) -> tuple[int, ...]:
        return tuple(w.shape[1] for w in self.hidden_weights)

    def copy(self) -> "MadeLayerParams":
        return MadeLayerParams(
            hidden_weights=[w.copy() for w in self.hidden_weights],
            hidden_biases=[b.copy() for b in self.hidden_biases],
            w_mu=self.w_mu.copy(),
            b_mu=self.b_mu.copy(),
            w_alpha=self.w_alpha.copy(),
            b_alpha=self.b_alpha.copy(),
            masks=self.masks,
        )


def init_made_params(
    dim: int, hidden_sizes: tuple[int, ...], rng: np.random.Generator
) -> MadeLayerParams:
    """Random masked hidden layers; zero output heads so the layer starts
    as the identity map (mu = alpha = 0)."""
    masks = build_masks(dim, hidden_sizes)
    widths = (dim, *hidden_sizes)
    hw, hb = [], []
    for fan_in, fan_out, mask in zip(widths[:-1], widths[1:], masks[:-1]):
        scale = np.sqrt(2.0 / fan_in)
        hw.append(rng.standard_normal((fan_in, fan_out)) * scale)
        hb.append(np.zeros(fan_out))
    last = widths[-1]
    return MadeLayerParams(
        hidden_weights=hw,
        hidden_biases=hb,
        w_mu=np.zeros((last, dim)),
        b_mu=np.zeros(dim),
        w_alpha=np.zeros((last, dim)),
        b_alpha=np.zeros(dim),
        masks=masks,
    )


def made_forward(x: np.ndarray, params: MadeLayerParams, want_cache: bool = False):
    """Apply the layer to (N, D) inputs; returns (u, log_det[, cache])."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != params.dim:
        raise ConfigError(f"expected (N, {params.dim}) input, got {x.shape}")
    h = x
    activations = [x]
    for w, b, mask in zip(params.hidden_weights, params.hidden_biases, params.masks):
        h = np.maximum(h @ (w * mask) + b, 0.0)
        activations.append(h)
    out_mask = params.masks[-1]
    mu = h @ (params.w_mu * out_mask) + params.b_mu
    alpha = h @ (params.w_alpha * out_mask) + params.b_alpha
    exp_neg = np.exp(-alpha)
    u = (x - mu) * exp_neg
    log_det = -alpha.sum(axis=1)
    if not want_cache:
        return u, log_det
    return u, log_det, {"activations": activations, "exp_neg": exp_neg, "u": u}


def made_backward(params: MadeLayerParams, cache: dict, g_u: np.ndarray, g_log_det: np.ndarray):
    """Backprop through made_forward.

    Returns (g_x, grads) where grads maps 'w0','b0',...,'w_mu','b_mu',
    'w_alpha','b_alpha' to arrays shaped like the parameters.
    """
    activations = cache["activations"]
    exp_neg = cache["exp_neg"]
    u = cache["u"]
    h_last = activations[-1]

    g_alpha = -g_u * u - g_log_det[:, None]
    g_mu = -g_u * exp_neg
    g_x = g_u * exp_neg

    out_mask = params.masks[-1]
    grads: dict[str, np.ndarray] = {
        "w_mu": (h_last.T @ g_mu) * out_mask,
        "b_mu": g_mu.sum(axis=0),
        "w_alpha": (h_last.T @ g_alpha) * out_mask,
        "b_alpha": g_alpha.sum(axis=0),
    }
    g_h = g_mu @ (params.w_mu * out_mask).T + g_alpha @ (params.w_alpha * out_mask).T
    for idx in range(len(params.hidden_weights) - 1, -1, -1):
        w = params.hidden_weights[idx]
        mask = params.masks[idx]
        pre_act = activations[idx + 1]
        g_pre = g_h * (pre_act > 0.0)
        grads[f"w{idx}"] = (activations[idx].T @ g_pre) * mask
        grads[f"b{idx}"] = g_pre.sum(axis=0)
        g_h = g_pre @ (w * mask).T
    g_x = g_x + g_h
    return g_x, grads


def made_inverse(u: np.ndarray, params: MadeLayerParams) -> np.ndarray:
    """Sequential inverse: x_j = u_j * exp(alpha_j(x_<j)) + mu_j(x_<j))."""
    u = np.asarray(u, dtype=np.float64)
    x = np.zeros_like(u)
    for j in range(params.dim):
        h = x
        for w, b, mask in zip(params.hidden_weights, params.hidden_biases, params.masks):
            h = np.maximum(h @ (w * mask) + b, 0.0)
        out_mask = params.masks[-1]
        mu_j = h @ (params.w_mu[:, j] * out_mask[:, j]) + params.b_mu[j]
        alpha_j = h @ (params.w_alpha[:, j] * out_mask[:, j]) + params.b_alpha[j]
        x[:, j] = u[:, j] * np.exp(alpha_j) + mu_j
    return x
