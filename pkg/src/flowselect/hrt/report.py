"""Per-feature test results and their file renderings."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import InvalidInputError


@dataclass
class TestReport:
    feature_ids: list[str]
    observed_statistic: float
    p_values: np.ndarray
    selected: np.ndarray
    threshold: float | None
    gamma: float
    correction: str
    n_null_samples: int
    seeds: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    acceptance_rates: np.ndarray | None = None

    def __post_init__(self):
        d = len(self.feature_ids)
        if self.p_values.shape != (d,) or self.selected.shape != (d,):
            raise InvalidInputError("report arrays must align with feature_ids")
        k = self.n_null_samples
        grid = np.round(self.p_values * (k + 1))
        if not np.allclose(self.p_values, grid / (k + 1), atol=1e-12):
            raise InvalidInputError("p-values must be multiples of 1/(K+1)")
        if self.threshold is None:
            if self.selected.any():
                raise InvalidInputError("no threshold implies an empty selection")
        elif not np.array_equal(self.selected, self.p_values <= self.threshold):
            raise InvalidInputError("selection mask must equal p <= threshold")

    @property
    def n_selected(self) -> int:
        return int(self.selected.sum())

    def selected_ids(self) -> list[str]:
        return [f for f, s in zip(self.feature_ids, self.selected) if s]

    # ---- file renderings -------------------------------------------------

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["feature_id", "statistic", "p_value", "selected"])
            for fid, p, sel in zip(self.feature_ids, self.p_values, self.selected):
                writer.writerow(
                    [fid, f"{self.observed_statistic:.10g}", f"{p:.10g}", str(bool(sel)).lower()]
                )

    def write_summary_json(self, path: str | Path) -> None:
        payload = {
            "gamma": self.gamma,
            "method": self.correction,
            "s_gamma": self.threshold,
            "k": self.n_null_samples,
            "observed_statistic": self.observed_statistic,
            "n_features": len(self.feature_ids),
            "n_selected": self.n_selected,
            "selected": self.selected_ids(),
            "seeds": self.seeds,
            "timings_sec": self.timings,
        }
        Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")

    def write_manhattan_tsv(self, path: str | Path, groups: list[str] | None = None) -> None:
        """Tidy export of -log10 p per feature for Manhattan-style plots."""
        if groups is not None and len(groups) != len(self.feature_ids):
            raise InvalidInputError("group labels must align with feature_ids")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, delimiter="\t")
            writer.writerow(["feature_id", "group", "neg_log10_p"])
            for i, (fid, p) in enumerate(zip(self.feature_ids, self.p_values)):
                group = groups[i] if groups is not None else ""
                writer.writerow([fid, group, f"{-math.log10(p):.10g}"])
