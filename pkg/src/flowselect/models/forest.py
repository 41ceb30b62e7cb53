"""Bootstrap-aggregated regression trees with variance-reduction splits.

Trees are stored as flat arrays (feature, threshold, children, leaf mean)
so prediction is a tight array traversal; a numba kernel accelerates the
batched path with a pure-numpy fallback kept behaviorally identical.
Split ties break toward the lowest feature index, then lowest threshold,
making fits deterministic given the seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidInputError
from ..rng import TAG_MODEL, stream

try:  # pragma: no cover - exercised implicitly by equality tests
    from numba import njit, prange

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

LEAF = -1


@dataclass
class ForestConfig:
    n_trees: int = 100
    max_depth: int | None = None
    min_samples_leaf: int = 5
    features_per_split: int | None = None  # default: ceil(D / 3)
    seed: int = 0

    def resolved_features_per_split(self, d: int) -> int:
        m = self.features_per_split or int(np.ceil(d / 3))
        return max(1, min(m, d))


@dataclass
class Tree:
    feature: np.ndarray  # int32, LEAF at leaves
    threshold: np.ndarray
    left: np.ndarray  # int32
    right: np.ndarray  # int32
    value: np.ndarray  # leaf means (0 at internal nodes)

    def predict(self, x: np.ndarray) -> np.ndarray:
        out = np.empty(x.shape[0])
        for i in range(x.shape[0]):
            node = 0
            while self.feature[node] != LEAF:
                if x[i, self.feature[node]] <= self.threshold[node]:
                    node = self.left[node]
                else:
                    node = self.right[node]
            out[i] = self.value[node]
        return out


@dataclass
class ForestModel:
    trees: list[Tree]
    n_features: int
    config: ForestConfig = field(default_factory=ForestConfig)

    def predict(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.n_features:
            raise InvalidInputError(
                f"expected (N, {self.n_features}) features, got {x.shape}"
            )
        packed = _pack_trees(self.trees)
        return _batch_predict(packed, np.ascontiguousarray(x))

    def predict_column_swaps(
        self, x: np.ndarray, j: int, columns: np.ndarray, chunk: int = 64
    ) -> np.ndarray:
        """Predictions with column j swapped for each of the K columns,
        evaluated in chunks of realized matrices; (N, K) output."""
        x = np.asarray(x, dtype=np.float64)
        n, k = columns.shape
        if n != x.shape[0]:
            raise InvalidInputError("swap columns must align with the feature rows")
        packed = _pack_trees(self.trees)
        out = np.empty((n, k))
        for start in range(0, k, chunk):
            stop = min(start + chunk, k)
            width = stop - start
            block = np.repeat(x[None, :, :], width, axis=0)  # (width, N, D)
            block[:, :, j] = columns[:, start:stop].T
            preds = _batch_predict(packed, np.ascontiguousarray(block.reshape(width * n, -1)))
            out[:, start:stop] = preds.reshape(width, n).T
        return out


def fit_random_forest(x: np.ndarray, y: np.ndarray, config: ForestConfig | None = None) -> ForestModel:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise InvalidInputError("X and Y must have matching row counts")
    if x.shape[0] < 2:
        raise InvalidInputError("need at least two training rows")
    config = config or ForestConfig()
    n, d = x.shape
    m_try = config.resolved_features_per_split(d)
    trees = []
    for t in range(config.n_trees):
        gen = stream(config.seed, TAG_MODEL, 1, t)
        rows = gen.integers(0, n, n)  # bootstrap sample
        trees.append(_grow_tree(x, y, rows, config, m_try, gen))
    return ForestModel(trees=trees, n_features=d, config=config)


def _grow_tree(
    x: np.ndarray,
    y: np.ndarray,
    rows: np.ndarray,
    config: ForestConfig,
    m_try: int,
    gen: np.random.Generator,
) -> Tree:
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[float] = []

    def new_node() -> int:
        feature.append(LEAF)
        threshold.append(np.inf)
        left.append(0)
        right.append(0)
        value.append(0.0)
        return len(feature) - 1

    max_depth = config.max_depth if config.max_depth is not None else np.inf
    min_leaf = config.min_samples_leaf

    # explicit stack: (row indices, depth, parent node, is_left_child)
    stack: list[tuple[np.ndarray, int, int, bool]] = [(rows, 0, -1, False)]
    while stack:
        idx, depth, parent, is_left = stack.pop()
        node = new_node()
        if parent >= 0:
            (left if is_left else right)[parent] = node
        yv = y[idx]
        split = None
        if depth < max_depth and idx.size >= 2 * min_leaf and np.ptp(yv) > 0.0:
            split = _best_split(x, y, idx, m_try, min_leaf, gen)
        if split is None:
            value[node] = float(yv.mean())
            continue
        f, thr = split
        go_left = x[idx, f] <= thr
        feature[node] = f
        threshold[node] = thr
        # push right first so the left subtree is laid out next (preorder)
        stack.append((idx[~go_left], depth + 1, node, False))
        stack.append((idx[go_left], depth + 1, node, True))
    return Tree(
        feature=np.asarray(feature, dtype=np.int32),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int32),
        right=np.asarray(right, dtype=np.int32),
        value=np.asarray(value, dtype=np.float64),
    )


def _best_split(
    x: np.ndarray,
    y: np.ndarray,
    idx: np.ndarray,
    m_try: int,
    min_leaf: int,
    gen: np.random.Generator,
) -> tuple[int, float] | None:
    """Exhaustive variance-reduction search over a random feature subset.

    Returns (feature, threshold) or None when no admissible split exists.
    Candidates with equal gain resolve to the lowest feature index, then
    the lowest threshold.
    """
    d = x.shape[1]
    candidates = np.sort(gen.choice(d, size=m_try, replace=False))
    n = idx.size
    yv = y[idx]
    best_gain = -np.inf
    best: tuple[int, float] | None = None
    for f in candidates:
        xv = x[idx, f]
        order = np.argsort(xv, kind="stable")
        xs, ys = xv[order], yv[order]
        csum = np.cumsum(ys)
        csq = np.cumsum(ys * ys)
        total_sum, total_sq = csum[-1], csq[-1]
        # split after position i (1-based count of left samples)
        counts = np.arange(1, n)
        valid = (counts >= min_leaf) & (counts <= n - min_leaf)
        valid &= xs[1:] > xs[:-1]  # only between distinct values
        if not valid.any():
            continue
        i = counts[valid]
        left_sum = csum[i - 1]
        left_sq = csq[i - 1]
        right_sum = total_sum - left_sum
        right_sq = total_sq - left_sq
        sse = (left_sq - left_sum**2 / i) + (right_sq - right_sum**2 / (n - i))
        gain = (total_sq - total_sum**2 / n) - sse
        k = int(np.argmax(gain))
        if gain[k] > best_gain + 1e-12:
            pos = i[k]
            thr = 0.5 * (xs[pos - 1] + xs[pos])
            best_gain = float(gain[k])
            best = (int(f), float(thr))
    return best


# ---- batched prediction ----------------------------------------------------


def _pack_trees(trees: list[Tree]):
    offsets = np.zeros(len(trees) + 1, dtype=np.int64)
    for i, t in enumerate(trees):
        offsets[i + 1] = offsets[i] + t.feature.size
    feature = np.concatenate([t.feature for t in trees]).astype(np.int32)
    threshold = np.concatenate([t.threshold for t in trees])
    left = np.concatenate([t.left for t in trees]).astype(np.int32)
    right = np.concatenate([t.right for t in trees]).astype(np.int32)
    value = np.concatenate([t.value for t in trees])
    return offsets, feature, threshold, left, right, value


def _batch_predict_numpy(packed, x: np.ndarray) -> np.ndarray:
    offsets, feature, threshold, left, right, value = packed
    n_trees = offsets.size - 1
    out = np.zeros(x.shape[0])
    for t in range(n_trees):
        base = offsets[t]
        node = np.full(x.shape[0], base, dtype=np.int64)
        while True:
            f = feature[node]
            internal = f != LEAF
            if not internal.any():
                break
            xv = x[np.arange(x.shape[0]), np.maximum(f, 0)]
            go_left = xv <= threshold[node]
            nxt = np.where(go_left, left[node] + base, right[node] + base)
            node = np.where(internal, nxt, node)
        out += value[node]
    return out / n_trees


if _HAVE_NUMBA:

    @njit(parallel=True, cache=True)
    def _batch_predict_kernel(offsets, feature, threshold, left, right, value, x):  # pragma: no cover
        n = x.shape[0]
        n_trees = offsets.size - 1
        out = np.zeros(n)
        for i in prange(n):
            acc = 0.0
            for t in range(n_trees):
                base = offsets[t]
                node = base
                while feature[node] != -1:
                    if x[i, feature[node]] <= threshold[node]:
                        node = left[node] + base
                    else:
                        node = right[node] + base
                acc += value[node]
            out[i] = acc / n_trees
        return out

    def _batch_predict(packed, x: np.ndarray) -> np.ndarray:
        return _batch_predict_kernel(*packed, x)

else:

    def _batch_predict(packed, x: np.ndarray) -> np.ndarray:
        return _batch_predict_numpy(packed, x)
