"""Static PNG figures rendered next to the delimited outputs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def training_curves_figure(history, path: Path) -> None:
    epochs = [rec.epoch for rec in history]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(epochs, [rec.train_nll for rec in history], label="train NLL", lw=1.5)
    ax.plot(epochs, [rec.val_nll for rec in history], label="validation NLL", lw=1.5)
    phase2_start = next((rec.epoch for rec in history if rec.phase == 2), None)
    if phase2_start is not None and phase2_start > 0:
        ax.axvline(phase2_start - 0.5, color="gray", ls="--", lw=1, label="joint phase")
    ax.set_xlabel("epoch")
    ax.set_ylabel("negative log-likelihood")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def manhattan_figure(report, path: Path, groups: list[str] | None = None) -> None:
    """-log10 p per feature with the selection threshold line."""
    p = report.p_values
    neg_log = -np.log10(p)
    x = np.arange(len(p))
    fig, ax = plt.subplots(figsize=(max(7, len(p) * 0.08), 4.5))
    if groups:
        uniq = list(dict.fromkeys(groups))
        cmap = plt.get_cmap("tab10")
        for gi, g in enumerate(uniq):
            rows = [i for i, lab in enumerate(groups) if lab == g]
            ax.scatter(x[rows], neg_log[rows], s=14, color=cmap(gi % 10), label=str(g))
        if len(uniq) <= 10:
            ax.legend(frameon=False, fontsize=8)
    else:
        ax.scatter(x, neg_log, s=14, color="#30609c")
    if report.threshold is not None:
        ax.axhline(-np.log10(report.threshold), color="#c23b22", ls="--", lw=1,
                   label="selection threshold")
    ax.set_xlabel("feature")
    ax.set_ylabel(r"$-\log_{10}\,\hat p$")
    ax.set_title(f"{report.correction.upper()} at target rate {report.gamma}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def fdr_power_figure(result, path: Path) -> None:
    """Mean FDP and power versus the target rate, across replicates."""
    gammas = sorted(result.gammas)
    fdp = [result.aggregates[g]["mean_fdp"] for g in gammas]
    power = [result.aggregates[g]["mean_power"] for g in gammas]
    fig, axes = plt.subplots(1, 2, figsize=(9, 4))
    axes[0].plot(gammas, fdp, "o-", color="#30609c", label="mean FDP")
    axes[0].plot(gammas, gammas, "--", color="gray", lw=1, label="target")
    axes[0].set_xlabel("target FDR")
    axes[0].set_ylabel("mean false discovery proportion")
    axes[0].legend(frameon=False)
    if all(p is not None for p in power):
        axes[1].plot(gammas, power, "o-", color="#2e7d32")
    axes[1].set_xlabel("target FDR")
    axes[1].set_ylabel("mean power")
    axes[1].set_ylim(-0.02, 1.02)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
