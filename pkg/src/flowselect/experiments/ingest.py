"""CSV ingestion and semi-synthetic preprocessing.

Feature files carry a header row and one observation per row of decimal
floats; parse failures report the offending row and column. The
preprocessing mirrors the semi-synthetic protocol: min-max scale each
column to [0, 1], add a little Gaussian noise against zero inflation,
then keep the most-correlated columns.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import InvalidInputError
from ..rng import TAG_FEATURES, stream


def load_feature_csv(path: str | Path) -> tuple[np.ndarray, list[str]]:
    """Strictly parsed (X, column names); cell errors name row and column."""
    path = Path(path)
    if not path.exists():
        raise InvalidInputError(f"dataset file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            names = next(reader)
        except StopIteration:
            raise InvalidInputError(f"{path}: file is empty") from None
        names = [n.strip() for n in names]
        rows: list[list[float]] = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(names):
                raise InvalidInputError(
                    f"{path}: row {line_no} has {len(row)} cells, expected {len(names)}"
                )
            parsed = []
            for col, cell in enumerate(row):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise InvalidInputError(
                        f"{path}: row {line_no}, column '{names[col]}': "
                        f"cannot parse {cell!r} as a number"
                    ) from None
            rows.append(parsed)
    if not rows:
        raise InvalidInputError(f"{path}: no data rows")
    return np.asarray(rows, dtype=np.float64), names


def load_response_csv(path: str | Path) -> np.ndarray:
    y, names = load_feature_csv(path)
    if y.shape[1] != 1:
        raise InvalidInputError(f"{path}: response file must have exactly one column")
    return y[:, 0]


def write_feature_csv(path: str | Path, x: np.ndarray, names: list[str]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for row in np.asarray(x, dtype=np.float64):
            writer.writerow([f"{v:.12g}" for v in row])


@dataclass
class UnitIntervalScaling:
    mins: np.ndarray
    ranges: np.ndarray
    noise_std: float
    seed: int


def normalize_unit_interval(
    x: np.ndarray, noise_std: float, seed: int
) -> tuple[np.ndarray, UnitIntervalScaling]:
    """Per-column min-max map onto [0, 1] plus additive Gaussian noise."""
    x = np.asarray(x, dtype=np.float64)
    mins = x.min(axis=0)
    ranges = x.max(axis=0) - mins
    bad = np.flatnonzero(ranges == 0)
    if bad.size:
        raise InvalidInputError(
            f"column(s) {bad.tolist()} are constant and cannot be normalized"
        )
    scaled = (x - mins) / ranges
    if noise_std > 0:
        scaled = scaled + noise_std * stream(seed, TAG_FEATURES, 1).standard_normal(x.shape)
    return scaled, UnitIntervalScaling(mins=mins, ranges=ranges, noise_std=noise_std, seed=seed)


def select_top_correlated(x: np.ndarray, m: int, method: str = "max_abs") -> np.ndarray:
    """Indices of the m columns most correlated with any other column.

    method="max_abs" scores each column by its largest absolute pairwise
    correlation; "mean_abs" uses the average instead. Ties break toward
    the lower column index; the returned indices are sorted ascending.
    """
    x = np.asarray(x, dtype=np.float64)
    d = x.shape[1]
    if not 1 <= m <= d:
        raise InvalidInputError(f"m must lie in 1..{d}, got {m}")
    if method not in ("max_abs", "mean_abs"):
        raise InvalidInputError(f"unknown correlation method {method!r}")
    corr = np.corrcoef(x, rowvar=False)
    np.fill_diagonal(corr, 0.0)
    scores = np.abs(corr).max(axis=1) if method == "max_abs" else np.abs(corr).mean(axis=1)
    # stable sort on negated scores: equal scores keep index order
    ranked = np.argsort(-scores, kind="stable")
    return np.sort(ranked[:m])
