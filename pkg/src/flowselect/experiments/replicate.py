"""Replicated selection experiments over fresh synthetic responses.

One feature matrix and one fitted flow serve every replicate; the null
samples are response-independent, so they too are drawn once (per
feature) and shared. Each replicate draws a new coefficient support and
noise, refits the predictive model, and evaluates FDP/power at every
target level.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import FlowSelectError, InvalidInputError
from ..hrt import PipelineConfig, TestReport, bh_select, by_select, prepare_pipeline, test_with_response
from ..mog import MoGSpec, gen_mog_features
from .metrics import evaluate_selection
from .response import ResponseSpec, draw_response_spec, gen_response

logger = logging.getLogger(__name__)


@dataclass
class DatasetConfig:
    """Either a synthetic mixture draw or an externally supplied matrix."""

    mog: MoGSpec | None = None
    n_rows: int = 20000
    feature_seed: int = 0
    x: np.ndarray | None = None
    response_mode: str = "linear"
    response_noise_std: float = 1.0
    response_sparsity: float = 0.8
    fixed_beta: np.ndarray | None = None

    def features(self) -> np.ndarray:
        if self.x is not None:
            return np.asarray(self.x, dtype=np.float64)
        if self.mog is None:
            raise InvalidInputError("dataset config needs either a mixture spec or a matrix")
        return gen_mog_features(self.mog, self.n_rows, self.feature_seed)


@dataclass
class ReplicateRecord:
    replicate: int
    gamma: float
    fdp: float
    power: float | None
    n_selected: int
    selected: list[int]
    relevant: list[int]
    response_seed: int
    error: str | None = None


@dataclass
class ExperimentResult:
    records: list[ReplicateRecord]
    aggregates: dict[float, dict]
    n_replicates: int
    n_failed: int
    gammas: list[float]
    provenance: dict = field(default_factory=dict)
    reports: list[TestReport] = field(default_factory=list, repr=False)

    def mean_fdp(self, gamma: float) -> float:
        return self.aggregates[gamma]["mean_fdp"]

    def mean_power(self, gamma: float) -> float | None:
        return self.aggregates[gamma]["mean_power"]


def aggregate_records(records: list[ReplicateRecord], gammas: list[float]) -> dict[float, dict]:
    out: dict[float, dict] = {}
    for gamma in gammas:
        rows = [r for r in records if r.gamma == gamma and r.error is None]
        fdps = np.array([r.fdp for r in rows])
        powers = np.array([r.power for r in rows if r.power is not None], dtype=np.float64)
        out[gamma] = {
            "n": len(rows),
            "mean_fdp": float(fdps.mean()) if rows else float("nan"),
            "fdp_q25": float(np.quantile(fdps, 0.25)) if rows else float("nan"),
            "fdp_q75": float(np.quantile(fdps, 0.75)) if rows else float("nan"),
            "mean_power": float(powers.mean()) if powers.size else None,
            "power_q25": float(np.quantile(powers, 0.25)) if powers.size else None,
            "power_q75": float(np.quantile(powers, 0.75)) if powers.size else None,
        }
    return out


def replicate_experiment(
    dataset: DatasetConfig,
    pipeline: PipelineConfig,
    gammas: list[float],
    n_replicates: int,
    keep_reports: bool = False,
) -> ExperimentResult:
    if n_replicates < 1:
        raise InvalidInputError("n_replicates must be >= 1")
    if not gammas:
        raise InvalidInputError("need at least one target level")
    x = dataset.features()
    t0 = time.perf_counter()
    state = prepare_pipeline(x, pipeline)
    logger.info("shared preparation done in %.1fs", time.perf_counter() - t0)

    records: list[ReplicateRecord] = []
    reports: list[TestReport] = []
    n_failed = 0
    for rep in range(n_replicates):
        response_seed = pipeline.seed + 1000 * (rep + 1)
        try:
            spec = _response_spec(dataset, response_seed)
            y = gen_response(x, spec)
            report = test_with_response(state, y)
            if keep_reports:
                reports.append(report)
            for gamma in gammas:
                select = bh_select if pipeline.correction == "bh" else by_select
                _, mask = select(report.p_values, gamma)
                selected = np.flatnonzero(mask).tolist()
                fdp, power = evaluate_selection(selected, spec.relevant)
                records.append(
                    ReplicateRecord(
                        replicate=rep,
                        gamma=gamma,
                        fdp=fdp,
                        power=power,
                        n_selected=len(selected),
                        selected=selected,
                        relevant=sorted(spec.relevant),
                        response_seed=response_seed,
                    )
                )
        except FlowSelectError as exc:
            n_failed += 1
            logger.warning("replicate %d failed: %s", rep, exc)
            for gamma in gammas:
                records.append(
                    ReplicateRecord(
                        replicate=rep,
                        gamma=gamma,
                        fdp=float("nan"),
                        power=None,
                        n_selected=0,
                        selected=[],
                        relevant=[],
                        response_seed=response_seed,
                        error=str(exc),
                    )
                )
    provenance = {
        "pipeline_seed": pipeline.seed,
        "feature_seed": dataset.feature_seed,
        "response_seeds": [pipeline.seed + 1000 * (r + 1) for r in range(n_replicates)],
        "statistic": pipeline.statistic,
        "correction": pipeline.correction,
        "k": pipeline.n_null_samples,
    }
    return ExperimentResult(
        records=records,
        aggregates=aggregate_records(records, gammas),
        n_replicates=n_replicates,
        n_failed=n_failed,
        gammas=list(gammas),
        provenance=provenance,
        reports=reports,
    )


def write_replicates_csv(records: list[ReplicateRecord], path) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "replicate", "gamma", "fdp", "power", "n_selected",
                "selected", "relevant", "response_seed", "error",
            ]
        )
        for r in records:
            writer.writerow(
                [
                    r.replicate,
                    r.gamma,
                    f"{r.fdp:.6g}",
                    "" if r.power is None else f"{r.power:.6g}",
                    r.n_selected,
                    " ".join(str(i) for i in r.selected),
                    " ".join(str(i) for i in r.relevant),
                    r.response_seed,
                    r.error or "",
                ]
            )


def check_experiment_integrity(replicates_csv, aggregate: dict) -> None:
    """Cross-check the per-replicate file against the aggregate summary.

    Verifies the row count (replicates x gammas), recomputes FDP and power
    from the stored selected/relevant sets, and recomputes each gamma's
    mean FDP; any mismatch raises InvalidInputError.
    """
    import csv

    from .metrics import evaluate_selection

    with open(replicates_csv, newline="") as fh:
        rows = list(csv.DictReader(fh))
    gammas = [float(g) for g in aggregate["gammas"]]
    expected = aggregate["n_replicates"] * len(gammas)
    if len(rows) != expected:
        raise InvalidInputError(
            f"replicate file has {len(rows)} rows, expected "
            f"{aggregate['n_replicates']} replicates x {len(gammas)} gammas = {expected}"
        )
    sums: dict[float, list[float]] = {g: [] for g in gammas}
    for row in rows:
        if row["error"]:
            continue
        selected = [int(t) for t in row["selected"].split()] if row["selected"] else []
        relevant = [int(t) for t in row["relevant"].split()] if row["relevant"] else []
        fdp, power = evaluate_selection(selected, relevant)
        if abs(fdp - float(row["fdp"])) > 1e-6:
            raise InvalidInputError(
                f"replicate {row['replicate']} gamma {row['gamma']}: stored FDP "
                f"{row['fdp']} does not match recomputed {fdp:.6g}"
            )
        stored_power = float(row["power"]) if row["power"] else None
        if (power is None) != (stored_power is None) or (
            power is not None and abs(power - stored_power) > 1e-6
        ):
            raise InvalidInputError(
                f"replicate {row['replicate']} gamma {row['gamma']}: power mismatch"
            )
        sums[float(row["gamma"])].append(fdp)
    for g in gammas:
        stored = aggregate["aggregates"][str(g)]["mean_fdp"]
        if sums[g] and abs(np.mean(sums[g]) - stored) > 1e-6:
            raise InvalidInputError(f"aggregate mean FDP at gamma={g} does not match rows")


def _response_spec(dataset: DatasetConfig, response_seed: int) -> ResponseSpec:
    if dataset.fixed_beta is not None:
        return ResponseSpec(
            beta=dataset.fixed_beta,
            noise_std=dataset.response_noise_std,
            mode=dataset.response_mode,
            seed=response_seed,
        )
    x_dim = dataset.mog.dim if dataset.mog is not None else dataset.x.shape[1]
    return draw_response_spec(
        x_dim,
        seed=response_seed,
        mode=dataset.response_mode,
        noise_std=dataset.response_noise_std,
        sparsity=dataset.response_sparsity,
    )
