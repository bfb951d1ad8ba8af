"""Figure rendering for the reporting commands. All figures go to files;
nothing is shown interactively."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .evaluate import BlandAltmanStats, Pairs, RoiSweepResult
from .hr import HrSeries

_DPI = 150


def _save(fig, path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def render_bland_altman(path, ba: BlandAltmanStats) -> None:
    means = np.array([m for m, _ in ba.pairs])
    diffs = np.array([d for _, d in ba.pairs])
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.scatter(means, diffs, s=12, alpha=0.6, color="tab:blue")
    ax.axhline(ba.bias, color="tab:red", lw=1.2, label=f"bias {ba.bias:+.2f} bpm")
    ax.axhline(ba.loa_low, color="tab:gray", lw=1.0, ls="--",
               label=f"LoA [{ba.loa_low:+.2f}, {ba.loa_high:+.2f}]")
    ax.axhline(ba.loa_high, color="tab:gray", lw=1.0, ls="--")
    ax.set_xlabel("mean of prediction and reference [bpm]")
    ax.set_ylabel("prediction - reference [bpm]")
    ax.grid(alpha=0.3)
    ax.legend(loc="best", fontsize=8)
    _save(fig, path)


def render_correlation(path, pairs: Pairs) -> None:
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.scatter(pairs.ref, pairs.pred, s=12, alpha=0.6, color="tab:blue")
    lo = float(min(pairs.ref.min(), pairs.pred.min()))
    hi = float(max(pairs.ref.max(), pairs.pred.max()))
    pad = 0.05 * max(hi - lo, 1.0)
    ax.plot([lo - pad, hi + pad], [lo - pad, hi + pad], color="tab:gray",
            lw=1.0, ls="--", label="identity")
    ax.set_xlabel("reference HR [bpm]")
    ax.set_ylabel("predicted HR [bpm]")
    ax.set_aspect("equal", adjustable="box")
    ax.grid(alpha=0.3)
    ax.legend(loc="best", fontsize=8)
    _save(fig, path)


def render_hr_overlay(path, pred: HrSeries, ref_t: np.ndarray | None = None,
                      ref_bpm: np.ndarray | None = None) -> None:
    fig, ax = plt.subplots(figsize=(8, 3.5))
    if ref_t is not None and ref_bpm is not None:
        ax.plot(ref_t, ref_bpm, color="tab:gray", lw=1.2, label="reference")
    ax.plot(pred.t_s, pred.bpm, color="tab:blue", lw=1.2, label="prediction")
    if not np.all(pred.valid):
        bad = ~pred.valid
        ax.scatter(pred.t_s[bad], pred.bpm[bad], s=18, marker="x",
                   color="tab:red", label="interpolated")
    ax.set_xlabel("time [s]")
    ax.set_ylabel("HR [bpm]")
    ax.grid(alpha=0.3)
    ax.legend(loc="best", fontsize=8)
    _save(fig, path)


def render_sweep_histogram(path, sweep: RoiSweepResult) -> None:
    centers = (sweep.bin_edges[:-1] + sweep.bin_edges[1:]) / 2.0
    widths = np.diff(sweep.bin_edges)
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(centers, sweep.histogram, width=widths * 0.92, color="tab:blue",
           alpha=0.8, edgecolor="none")
    ax.set_xlabel("HR change vs base ROI [bpm]")
    ax.set_ylabel("window count")
    ax.set_title(f"ROI increments {list(sweep.increments_px)} px")
    ax.grid(alpha=0.3, axis="y")
    _save(fig, path)
