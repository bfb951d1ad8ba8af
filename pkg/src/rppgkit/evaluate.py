"""Agreement metrics between HR series and the ROI-robustness sweep."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, DataError
from .frames import FrameSequence, Roi
from .hr import DEFAULT_BAND_BPM, HrSeries, estimate_hr
from .rppg import ChromParams, Method, generate_sgt

DEFAULT_ALIGN_TOL_S = 0.5
DEFAULT_INCREMENTS_PX = (10, 20, 30, 40)
HIST_BIN_BPM = 5.0
HIST_SPAN_BPM = 60.0


@dataclass
class Pairs:
    """Timestamp-aligned (prediction, reference) HR samples."""

    t_s: np.ndarray
    pred: np.ndarray
    ref: np.ndarray

    def __post_init__(self):
        self.t_s = np.asarray(self.t_s, dtype=np.float64)
        self.pred = np.asarray(self.pred, dtype=np.float64)
        self.ref = np.asarray(self.ref, dtype=np.float64)
        if not (len(self.t_s) == len(self.pred) == len(self.ref)):
            raise ArgumentError("pair arrays must have equal lengths")

    def __len__(self) -> int:
        return len(self.t_s)


@dataclass(frozen=True)
class MetricsReport:
    mae: float
    rmse: float
    pearson_r: float | None
    n: int


@dataclass(frozen=True)
class BlandAltmanStats:
    bias: float
    sd: float
    loa_low: float
    loa_high: float
    pairs: tuple[tuple[float, float], ...]


@dataclass
class RoiSweepResult:
    increments_px: tuple[int, ...]
    relative_changes_bpm: np.ndarray
    histogram: np.ndarray
    bin_edges: np.ndarray


def align(pred: HrSeries, ref: HrSeries, tol_s: float = DEFAULT_ALIGN_TOL_S) -> Pairs:
    """Pair each valid prediction window with the nearest valid reference
    window within tol_s; unmatched windows are dropped.
    """
    if len(pred) == 0 or len(ref) == 0:
        raise DataError("cannot align empty HR series")
    ref_t = ref.t_s[ref.valid]
    ref_bpm = ref.bpm[ref.valid]
    if len(ref_t) == 0:
        raise DataError("reference series has no valid windows")
    t_out, p_out, r_out = [], [], []
    for t, bpm, ok in zip(pred.t_s, pred.bpm, pred.valid):
        if not ok:
            continue
        j = int(np.argmin(np.abs(ref_t - t)))
        if abs(ref_t[j] - t) <= tol_s:
            t_out.append(t)
            p_out.append(bpm)
            r_out.append(ref_bpm[j])
    if not t_out:
        raise DataError(f"no reference window within {tol_s} s of any prediction")
    return Pairs(np.array(t_out), np.array(p_out), np.array(r_out))


def window_average_reference(t_s: np.ndarray, bpm: np.ndarray, grid: HrSeries) -> HrSeries:
    """Average raw reference HR samples over the prediction's window grid, one
    mean per grid window; grid windows with no reference sample are invalid.
    """
    t_s = np.asarray(t_s, dtype=np.float64)
    bpm = np.asarray(bpm, dtype=np.float64)
    half = grid.window_s / 2.0
    out = np.empty(len(grid))
    valid = np.zeros(len(grid), dtype=bool)
    for k, center in enumerate(grid.t_s):
        inside = (t_s >= center - half) & (t_s <= center + half)
        if np.any(inside):
            out[k] = bpm[inside].mean()
            valid[k] = True
        else:
            out[k] = np.nan
    if not np.any(valid):
        raise DataError("no reference samples fall inside any prediction window")
    out[~valid] = 0.0
    return HrSeries(grid.t_s.copy(), out, valid, grid.window_s, grid.stride_s,
                    band_bpm=grid.band_bpm)


def _require_pairs(pairs: Pairs, minimum: int):
    if len(pairs) < minimum:
        raise DataError(f"need at least {minimum} pairs, got {len(pairs)}")


def mae(pairs: Pairs) -> float:
    _require_pairs(pairs, 1)
    return float(np.mean(np.abs(pairs.pred - pairs.ref)))


def rmse(pairs: Pairs) -> float:
    _require_pairs(pairs, 1)
    return float(np.sqrt(np.mean((pairs.pred - pairs.ref) ** 2)))


def pearson(pairs: Pairs) -> float:
    _require_pairs(pairs, 2)
    if np.ptp(pairs.pred) == 0.0 or np.ptp(pairs.ref) == 0.0:
        raise DataError("Pearson correlation undefined for a constant series")
    pd = pairs.pred - pairs.pred.mean()
    rd = pairs.ref - pairs.ref.mean()
    return float(np.dot(pd, rd) / np.sqrt(np.dot(pd, pd) * np.dot(rd, rd)))


def bland_altman(pairs: Pairs) -> BlandAltmanStats:
    _require_pairs(pairs, 2)
    diff = pairs.pred - pairs.ref
    mean = (pairs.pred + pairs.ref) / 2.0
    bias = float(diff.mean())
    sd = float(diff.std(ddof=1))
    return BlandAltmanStats(
        bias=bias, sd=sd, loa_low=bias - 1.96 * sd, loa_high=bias + 1.96 * sd,
        pairs=tuple((float(m), float(d)) for m, d in zip(mean, diff)))


def metrics_report(pairs: Pairs, allow_constant: bool = False) -> MetricsReport:
    """MAE, RMSE and Pearson r in one pass. With allow_constant, a constant
    series yields pearson_r = None instead of an error."""
    try:
        r = pearson(pairs)
    except DataError:
        if not allow_constant:
            raise
        r = None
    return MetricsReport(mae=mae(pairs), rmse=rmse(pairs), pearson_r=r, n=len(pairs))


@dataclass(frozen=True)
class HrConfig:
    window_s: float = 10.0
    stride_s: float = 1.0
    band_bpm: tuple[float, float] = DEFAULT_BAND_BPM


def _histogram(diffs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    lo = -HIST_SPAN_BPM
    hi = HIST_SPAN_BPM
    if len(diffs):
        lo = min(lo, np.floor(diffs.min() / HIST_BIN_BPM) * HIST_BIN_BPM)
        hi = max(hi, np.ceil(diffs.max() / HIST_BIN_BPM) * HIST_BIN_BPM)
    edges = np.arange(lo, hi + HIST_BIN_BPM / 2, HIST_BIN_BPM)
    counts, edges = np.histogram(diffs, bins=edges)
    return counts, edges


def roi_sweep(seq: FrameSequence, base: Roi,
              increments: tuple[int, ...] = DEFAULT_INCREMENTS_PX,
              method: Method | str = Method.CHROM,
              hr_config: HrConfig = HrConfig(),
              params: ChromParams | None = None,
              workers: int = 1) -> RoiSweepResult:
    """HR sensitivity to ROI growth: rerun the extraction pipeline with the
    ROI enlarged by each increment and pool per-window HR differences
    against the base ROI. Increments are independent; workers > 1 runs them
    in a thread pool with result order still fixed by increment."""
    height, width = seq.frame_shape
    for k in increments:
        grown = Roi(base.x, base.y, base.w + k, base.h + k)
        if not grown.fits(height, width):
            raise ArgumentError(
                f"ROI grown by {k} px ({grown.w}x{grown.h} at {grown.x},{grown.y}) "
                f"exceeds the {width}x{height} frame")

    def run(roi: Roi) -> np.ndarray:
        labels = generate_sgt(seq, roi, method, params=params)
        series = estimate_hr(labels.pulse, hr_config.window_s, hr_config.stride_s,
                             hr_config.band_bpm)
        return series.bpm

    base_bpm = run(base)
    grown_rois = [Roi(base.x, base.y, base.w + k, base.h + k) for k in increments]
    if workers > 1 and len(grown_rois) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, grown_rois))
    else:
        results = [run(roi) for roi in grown_rois]
    diffs = [bpm - base_bpm for bpm in results]
    pooled = np.concatenate(diffs) if diffs else np.empty(0)
    counts, edges = _histogram(pooled)
    return RoiSweepResult(increments_px=tuple(increments),
                          relative_changes_bpm=pooled,
                          histogram=counts, bin_edges=edges)
