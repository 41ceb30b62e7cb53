"""Command-line front end.

Subcommands: fit-flow, sample-nulls, test, experiment, inspect-checkpoint.
Exit codes: 0 success, 1 internal error, 2 invalid input, 3 config or
artifact mismatch.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from ..errors import ConfigError, FlowSelectError, InvalidInputError, StageError
from ..experiments import (
    DatasetConfig,
    check_experiment_integrity,
    gen_mog_features,
    load_feature_csv,
    load_response_csv,
    normalize_unit_interval,
    replicate_experiment,
    select_top_correlated,
    write_replicates_csv,
)
from ..flow import describe_checkpoint, load_checkpoint, save_checkpoint, train_flow, write_metrics_csv
from ..hrt import prepare_pipeline, test_with_response
from ..sampler import null_cache_path
from . import config as cfgmod
from .figures import fdr_power_figure, manhattan_figure, training_curves_figure
from .manifest import ManifestWriter

logger = logging.getLogger("flowselect")

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INPUT = 2
EXIT_CONFIG = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flowselect",
        description="Controlled feature selection with flow-based conditional nulls",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="info-level logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit-flow", help="fit the feature-density flow and write a checkpoint")
    p_fit.add_argument("config", help="YAML run configuration")
    p_fit.add_argument("--output-dir", help="override output_dir from the config")

    p_nulls = sub.add_parser("sample-nulls", help="draw and cache null features per column")
    p_nulls.add_argument("config")
    p_nulls.add_argument("--output-dir")
    p_nulls.add_argument("--features", help="comma-separated feature indices (default: all)")
    p_nulls.add_argument("--fit", action="store_true", help="fit the flow if no checkpoint exists")

    p_test = sub.add_parser("test", help="run the three-step selection pipeline")
    p_test.add_argument("config")
    p_test.add_argument("--output-dir")
    p_test.add_argument("--k", type=int, help="null samples per feature")
    p_test.add_argument("--gamma", type=float, help="target false discovery rate")
    p_test.add_argument("--correction", choices=["bh", "by"])
    p_test.add_argument("--statistic", choices=["lasso", "forest", "mlp"])
    p_test.add_argument("--oracle-conditional", action="store_true",
                        help="target the synthetic mixture exactly instead of a fitted flow")
    p_test.add_argument("--resume", action="store_true",
                        help="reuse null-sample caches in the output directory")
    p_test.add_argument("--threads", type=int)

    p_exp = sub.add_parser("experiment", help="replicated FDR/power evaluation")
    p_exp.add_argument("config")
    p_exp.add_argument("--output-dir")
    p_exp.add_argument("--threads", type=int)

    p_inspect = sub.add_parser("inspect-checkpoint", help="print checkpoint header and verify CRC")
    p_inspect.add_argument("path")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "fit-flow":
            return cmd_fit_flow(args)
        if args.command == "sample-nulls":
            return cmd_sample_nulls(args)
        if args.command == "test":
            return cmd_test(args)
        if args.command == "experiment":
            return cmd_experiment(args)
        if args.command == "inspect-checkpoint":
            return cmd_inspect(args)
        raise AssertionError(f"unhandled command {args.command}")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except StageError as exc:
        cause = exc.__cause__
        code = _exit_code_for(cause) if cause is not None else EXIT_INTERNAL
        print(f"error: {exc}", file=sys.stderr)
        return code
    except FlowSelectError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def _exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, InvalidInputError):
        return EXIT_INPUT
    return EXIT_INTERNAL


def _setup(args, command: str):
    cfg = cfgmod.load_config(args.config)
    if getattr(args, "output_dir", None):
        cfg["output_dir"] = args.output_dir
    if getattr(args, "threads", None):
        cfg["threads"] = args.threads
    out = Path(cfg["output_dir"])
    out.mkdir(parents=True, exist_ok=True)
    return cfg, out, ManifestWriter(command, cfg, out)


def _load_dataset(cfg: dict) -> tuple[np.ndarray, list[str]]:
    ds = cfg["dataset"]
    if ds["features_csv"] is not None:
        x, names = load_feature_csv(ds["features_csv"])
    else:
        spec = cfgmod.mog_spec(cfg)
        x = gen_mog_features(spec, int(ds["synthetic"]["n_rows"]), int(cfg["seed"]))
        names = [f"x{j}" for j in range(spec.dim)]
    if ds["normalize_unit_interval"]:
        x, _ = normalize_unit_interval(x, float(ds["normalize_noise_std"]), int(cfg["seed"]))
    if ds["top_correlated"] is not None:
        keep = select_top_correlated(x, int(ds["top_correlated"]), ds["correlation_method"])
        x = x[:, keep]
        names = [names[i] for i in keep]
    return x, names


def _checkpoint_path(out: Path) -> Path:
    return out / "flow_checkpoint.fsfl"


def cmd_fit_flow(args) -> int:
    cfg, out, manifest = _setup(args, "fit-flow")
    x, _ = _load_dataset(cfg)
    t0 = time.perf_counter()
    result = train_flow(x, cfgmod.flow_train_config(cfg), cfgmod.flow_arch(cfg))
    manifest.add_timing("train", time.perf_counter() - t0)

    ckpt = manifest.add_artifact("checkpoint", _checkpoint_path(out))
    save_checkpoint(result.model, ckpt)
    metrics = manifest.add_artifact("metrics_csv", out / "training_metrics.csv")
    write_metrics_csv(result.history, metrics)
    curves = manifest.add_artifact("training_curves_png", out / "training_curves.png")
    training_curves_figure(result.history, curves)
    manifest.write()
    print(f"checkpoint written to {ckpt} (best val NLL {result.best_val_nll:.4f})")
    return EXIT_OK


def _state_for(cfg: dict, out: Path, resume: bool, fit_if_missing: bool):
    """Shared stage wiring for sample-nulls and test."""
    x, names = _load_dataset(cfg)
    pipe = cfgmod.pipeline_config(cfg, feature_names=names)
    if resume:
        pipe.null_cache_dir = out / "null_caches"
    flow = None
    if pipe.oracle_conditional is None:
        ckpt = cfg["flow"]["checkpoint"]
        ckpt = Path(ckpt) if ckpt else _checkpoint_path(out)
        if ckpt.exists():
            flow = load_checkpoint(ckpt)
        elif not fit_if_missing:
            raise ConfigError(
                f"no flow checkpoint at {ckpt}; run fit-flow first or pass --fit"
            )
    return x, pipe, prepare_pipeline(x, pipe, flow=flow)


def cmd_sample_nulls(args) -> int:
    cfg, out, manifest = _setup(args, "sample-nulls")
    x, pipe, state = _state_for(cfg, out, resume=False, fit_if_missing=args.fit)
    pipe.null_cache_dir = out / "null_caches"
    state.config = pipe
    features = (
        [int(tok) for tok in args.features.split(",")]
        if args.features
        else list(range(x.shape[1]))
    )
    t0 = time.perf_counter()
    for j in features:
        state.null_samples_for(j)
        manifest.add_artifact(f"nulls_{j}", null_cache_path(pipe.null_cache_dir, j))
    manifest.add_timing("sampling", time.perf_counter() - t0)
    manifest.write()
    print(f"cached null samples for {len(features)} feature(s) under {pipe.null_cache_dir}")
    return EXIT_OK


def cmd_test(args) -> int:
    cfg, out, manifest = _setup(args, "test")
    if args.k is not None:
        cfg["mcmc"]["k"] = args.k
    if args.gamma is not None:
        cfg["test"]["gamma"] = args.gamma
    if args.correction:
        cfg["test"]["correction"] = args.correction
    if args.statistic:
        cfg["model"]["statistic"] = args.statistic
    if args.oracle_conditional:
        cfg["test"]["oracle_conditional"] = True
    cfgmod.resolve_config(cfg)  # re-validate after overrides

    if cfg["dataset"]["response_csv"] is None:
        raise ConfigError("dataset.response_csv is required for 'test'")
    y = load_response_csv(cfg["dataset"]["response_csv"])

    x, pipe, state = _state_for(cfg, out, resume=args.resume, fit_if_missing=True)
    if y.shape[0] != x.shape[0]:
        raise ConfigError(
            f"response has {y.shape[0]} rows but the feature matrix has {x.shape[0]}"
        )
    t0 = time.perf_counter()
    report = test_with_response(state, y)
    manifest.add_timing("test", time.perf_counter() - t0)

    report.write_csv(manifest.add_artifact("report_csv", out / "report.csv"))
    report.write_summary_json(manifest.add_artifact("summary_json", out / "summary.json"))
    report.write_manhattan_tsv(manifest.add_artifact("manhattan_tsv", out / "manhattan.tsv"))
    manhattan_figure(report, manifest.add_artifact("manhattan_png", out / "manhattan.png"))
    if state.flow is not None and not (cfg["flow"]["checkpoint"] or _checkpoint_path(out).exists()):
        save_checkpoint(state.flow, manifest.add_artifact("checkpoint", _checkpoint_path(out)))
    manifest.write()
    print(
        f"tested {len(report.feature_ids)} features: {report.n_selected} selected "
        f"at {report.correction.upper()} gamma={report.gamma}"
    )
    return EXIT_OK


def cmd_experiment(args) -> int:
    cfg, out, manifest = _setup(args, "experiment")
    ds = cfg["dataset"]
    rep = cfg["replicate"]
    spec = cfgmod.mog_spec(cfg)
    if spec is not None:
        dataset = DatasetConfig(
            mog=spec,
            n_rows=int(ds["synthetic"]["n_rows"]),
            feature_seed=int(cfg["seed"]),
            response_mode=rep["response_mode"],
            response_noise_std=float(rep["response_noise_std"]),
            response_sparsity=float(rep["sparsity"]),
        )
    else:
        x, _ = _load_dataset(cfg)
        dataset = DatasetConfig(
            x=x,
            feature_seed=int(cfg["seed"]),
            response_mode=rep["response_mode"],
            response_noise_std=float(rep["response_noise_std"]),
            response_sparsity=float(rep["sparsity"]),
        )
    pipe = cfgmod.pipeline_config(cfg)
    gammas = [float(g) for g in rep["gammas"]]
    t0 = time.perf_counter()
    result = replicate_experiment(dataset, pipe, gammas, int(rep["n_replicates"]))
    manifest.add_timing("experiment", time.perf_counter() - t0)

    rep_csv = manifest.add_artifact("replicates_csv", out / "replicates.csv")
    write_replicates_csv(result.records, rep_csv)
    agg_json = manifest.add_artifact("aggregate_json", out / "aggregate.json")
    payload = {
        "gammas": result.gammas,
        "n_replicates": result.n_replicates,
        "n_failed": result.n_failed,
        "aggregates": {str(g): result.aggregates[g] for g in result.gammas},
        "provenance": result.provenance,
    }
    Path(agg_json).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    check_experiment_integrity(rep_csv, payload)
    fdr_power_figure(result, manifest.add_artifact("fdr_power_png", out / "fdr_power.png"))
    manifest.write()
    for g in gammas:
        agg = result.aggregates[g]
        print(
            f"gamma={g}: mean FDP {agg['mean_fdp']:.3f}, "
            f"mean power {agg['mean_power'] if agg['mean_power'] is not None else 'n/a'}"
        )
    return EXIT_OK if result.n_failed == 0 else EXIT_INTERNAL


def cmd_inspect(args) -> int:
    info = describe_checkpoint(args.path)
    print(json.dumps(info, indent=2))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
