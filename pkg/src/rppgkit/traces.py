"""Reduce frame sequences to per-channel time series and remove DC."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, DataError
from .frames import FrameSequence, Roi


@dataclass
class RgbTrace:
    """Spatial ROI means per channel, one sample per frame."""

    r: np.ndarray
    g: np.ndarray
    b: np.ndarray
    fps: float
    t0: float = 0.0

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=np.float64)
        self.g = np.asarray(self.g, dtype=np.float64)
        self.b = np.asarray(self.b, dtype=np.float64)
        if not (len(self.r) == len(self.g) == len(self.b)):
            raise ArgumentError("trace channels must have equal length")
        if len(self.r) < 1:
            raise ArgumentError("trace must contain at least one sample")
        if self.fps <= 0:
            raise ArgumentError(f"fps must be positive, got {self.fps}")

    def __len__(self) -> int:
        return len(self.r)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(len(self.r)) / self.fps

    def channels(self) -> np.ndarray:
        """Stack as (n, 3)."""
        return np.column_stack([self.r, self.g, self.b])


@dataclass
class NormalizedTrace:
    """Dimensionless channels, zero mean per normalization window."""

    rn: np.ndarray
    gn: np.ndarray
    bn: np.ndarray
    fps: float


def spatial_average(seq: FrameSequence, roi: Roi) -> RgbTrace:
    """Mean of each channel over the ROI pixels, per frame, unquantized."""
    if len(seq) == 0:
        raise ArgumentError("cannot average an empty sequence")
    h, w = seq.frame_shape
    roi.require_fits(h, w)
    ys, xs = roi.slices
    block = seq.frames[:, ys, xs, :].astype(np.float64)
    means = block.mean(axis=(1, 2))
    return RgbTrace(means[:, 0], means[:, 1], means[:, 2], fps=seq.fps)


def normalize_window(values: np.ndarray) -> np.ndarray:
    """c / mean(c) - 1 over one window; raises on zero mean."""
    mean = values.mean()
    if mean == 0.0:
        raise DataError("temporal normalization undefined for a zero-mean window")
    return values / mean - 1.0


def temporal_normalize(trace: RgbTrace, window_len: int) -> NormalizedTrace:
    """Normalize each channel within consecutive windows of window_len
    samples (a trailing partial window is normalized over its own span).
    """
    if window_len < 2:
        raise ArgumentError(f"window_len must be >= 2, got {window_len}")
    out = []
    for chan in (trace.r, trace.g, trace.b):
        normed = np.empty_like(chan)
        for start in range(0, len(chan), window_len):
            stop = min(start + window_len, len(chan))
            normed[start:stop] = normalize_window(chan[start:stop])
        out.append(normed)
    return NormalizedTrace(out[0], out[1], out[2], fps=trace.fps)
