"""Step-up multiple-testing thresholds.

bh_select implements the Benjamini-Hochberg rule: sort p-values
ascending, find the largest rank r with p_(r) <= (r/D) * gamma, and
select every feature with p-value at or below that threshold value.
by_select is the dependence-robust Benjamini-Yekutieli variant: the same
rule with gamma divided by the harmonic number H_D.
"""

from __future__ import annotations

import numpy as np

from ..errors import InvalidInputError


def bh_select(p_values: np.ndarray, gamma: float) -> tuple[float | None, np.ndarray]:
    """Returns (threshold s(gamma) or None, boolean selection mask)."""
    p = np.asarray(p_values, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise InvalidInputError("p_values must be a non-empty vector")
    if np.any(p < 0) or np.any(p > 1):
        raise InvalidInputError("p-values must lie in [0, 1]")
    if not 0.0 <= gamma <= 1.0:
        raise InvalidInputError("gamma must lie in [0, 1]")
    d = p.size
    order = np.sort(p)
    bounds = gamma * np.arange(1, d + 1) / d
    passing = np.flatnonzero(order <= bounds)
    if passing.size == 0:
        return None, np.zeros(d, dtype=bool)
    threshold = float(order[passing[-1]])
    return threshold, p <= threshold


def by_select(p_values: np.ndarray, gamma: float) -> tuple[float | None, np.ndarray]:
    """Benjamini-Yekutieli: BH at gamma / sum_{d=1..D} (1/d)."""
    p = np.asarray(p_values, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise InvalidInputError("p_values must be a non-empty vector")
    harmonic = float(np.sum(1.0 / np.arange(1, p.size + 1)))
    return bh_select(p, gamma / harmonic)


def brute_force_bh(p_values: np.ndarray, gamma: float) -> tuple[float | None, np.ndarray]:
    """Counting-form evaluation used as a test oracle: a candidate threshold
    t is admissible when t <= gamma * #{i : p_i <= t} / D; the selection
    threshold is the largest admissible candidate. No sorting involved, so
    this exercises none of the main implementation's mechanics."""
    p = np.asarray(p_values, dtype=np.float64)
    d = p.size
    best = None
    for t in p:
        r = int((p <= t).sum())
        if t <= gamma * r / d and (best is None or t > best):
            best = float(t)
    if best is None:
        return None, np.zeros(d, dtype=bool)
    return best, p <= best
