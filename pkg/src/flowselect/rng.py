"""Counter-based derivation of independent RNG streams.

Every randomized component derives its generator from a root seed plus a
tuple of non-negative integer keys (observation index, feature index,
replicate number, ...). Streams with distinct keys are statistically
independent and reproducible regardless of scheduling order.
"""

from __future__ import annotations

import numpy as np

# Key-space tags so unrelated consumers of the same root seed never collide.
TAG_SPLIT = 1
TAG_FLOW = 2
TAG_CHAIN = 3
TAG_MODEL = 4
TAG_RESPONSE = 5
TAG_FEATURES = 6
TAG_GIBBS = 7


def stream(seed: int, *key: int) -> np.random.Generator:
    """Return a Generator for (seed, key...), independent across keys."""
    if any(k < 0 for k in key):
        raise ValueError(f"stream keys must be non-negative, got {key}")
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))
