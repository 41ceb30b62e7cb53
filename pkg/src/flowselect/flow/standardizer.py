"""Per-column affine standardization applied before the flow proper."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInputError


@dataclass
class Standardizer:
    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, x: np.ndarray) -> "Standardizer":
        x = np.asarray(x, dtype=np.float64)
        std = x.std(axis=0)
        bad = np.flatnonzero(std <= 0)
        if bad.size:
            raise InvalidInputError(
                f"constant column(s) {bad.tolist()} cannot be standardized"
            )
        return cls(mean=x.mean(axis=0), std=std)

    @classmethod
    def identity(cls, dim: int) -> "Standardizer":
        return cls(mean=np.zeros(dim), std=np.ones(dim))

    @property
    def log_det_row(self) -> float:
        return float(-np.log(self.std).sum())

    def forward(self, x: np.ndarray) -> np.ndarray:
        return (x - self.mean) / self.std

    def inverse(self, y: np.ndarray) -> np.ndarray:
        return y * self.std + self.mean

    def copy(self) -> "Standardizer":
        return Standardizer(self.mean.copy(), self.std.copy())
