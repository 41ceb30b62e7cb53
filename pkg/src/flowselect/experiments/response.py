"""Synthetic responses over a feature matrix.

Linear mode: Y = X beta + eps. Sine/cosine mode transforms each entry by
sin(5x) on odd rows and cos(5x) on even rows (1-based row parity) before
the inner product. The support of beta is the ground-truth relevant set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInputError
from ..rng import TAG_RESPONSE, stream

MODE_LINEAR = "linear"
MODE_SINE_COSINE = "sine_cosine"


@dataclass
class ResponseSpec:
    beta: np.ndarray
    noise_std: float = 1.0
    mode: str = MODE_LINEAR
    seed: int = 0

    def __post_init__(self):
        self.beta = np.asarray(self.beta, dtype=np.float64)
        if self.beta.ndim != 1:
            raise InvalidInputError("beta must be a vector")
        if self.noise_std < 0:
            raise InvalidInputError("noise_std must be non-negative")
        if self.mode not in (MODE_LINEAR, MODE_SINE_COSINE):
            raise InvalidInputError(f"unknown response mode {self.mode!r}")

    @property
    def relevant(self) -> set[int]:
        return set(np.flatnonzero(self.beta != 0.0).tolist())


def draw_response_spec(
    dim: int,
    seed: int,
    mode: str = MODE_LINEAR,
    noise_std: float = 1.0,
    sparsity: float = 0.8,
) -> ResponseSpec:
    """Random coefficient vector with exactly floor(sparsity * D) zeros.

    Nonzero entries are uniform on +/-[0.5, 1.5] scaled by 1/sqrt(#relevant)
    so the signal-to-noise ratio stays stable across dimensions.
    """
    n_zero = int(np.floor(sparsity * dim))
    n_relevant = dim - n_zero
    if n_relevant < 1:
        raise InvalidInputError(f"sparsity {sparsity} leaves no relevant features at D={dim}")
    gen = stream(seed, TAG_RESPONSE, 0)
    support = np.sort(gen.choice(dim, size=n_relevant, replace=False))
    beta = np.zeros(dim)
    magnitudes = gen.uniform(0.5, 1.5, size=n_relevant) / np.sqrt(n_relevant)
    signs = gen.choice([-1.0, 1.0], size=n_relevant)
    beta[support] = magnitudes * signs
    return ResponseSpec(beta=beta, noise_std=noise_std, mode=mode, seed=seed)


def gen_response(x: np.ndarray, spec: ResponseSpec) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != spec.beta.shape[0]:
        raise InvalidInputError(
            f"features {x.shape} do not match beta of length {spec.beta.shape[0]}"
        )
    if not np.isfinite(x).all():
        raise InvalidInputError("non-finite feature values")
    if spec.mode == MODE_LINEAR:
        signal = x @ spec.beta
    else:
        transformed = np.empty_like(x)
        odd_rows = (np.arange(x.shape[0]) % 2) == 0  # 1-based odd rows
        transformed[odd_rows] = np.sin(5.0 * x[odd_rows])
        transformed[~odd_rows] = np.cos(5.0 * x[~odd_rows])
        signal = transformed @ spec.beta
    noise = stream(spec.seed, TAG_RESPONSE, 1).standard_normal(x.shape[0])
    return signal + spec.noise_std * noise
