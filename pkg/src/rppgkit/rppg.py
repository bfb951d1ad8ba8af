"""Chrominance-based pulse extraction (CHROM, POS) and label generation.

Both methods work on short sliding windows of the RGB trace: each window is
temporally normalized, projected onto a chrominance plane that cancels
common-mode illumination, and the per-window signals are recombined by
overlap-add into one pulse waveform covering the full recording.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .dsp import FilterSpec, butterworth_bandpass, filter_zero_phase, hann_window
from .errors import ArgumentError
from .frames import FrameSequence, Roi
from .traces import RgbTrace, spatial_average

DEFAULT_SGT_BAND_HZ = (1.3, 4.0)


class Method(enum.Enum):
    CHROM = "chrom"
    POS = "pos"

    @classmethod
    def parse(cls, name: str) -> "Method":
        try:
            return cls(name.lower())
        except ValueError:
            raise ArgumentError(f"unknown extraction method {name!r}") from None


@dataclass
class PulseSignal:
    """Single-channel pulse waveform in arbitrary units."""

    samples: np.ndarray
    fps: float
    t0: float = 0.0
    degenerate_windows: tuple[int, ...] = ()

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.fps <= 0:
            raise ArgumentError(f"fps must be positive, got {self.fps}")
        if not np.all(np.isfinite(self.samples)):
            raise ArgumentError("pulse samples must be finite")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(len(self.samples)) / self.fps


@dataclass(frozen=True)
class ChromParams:
    window_s: float = 1.6
    overlap: float = 0.5
    band_hz: tuple[float, float] = DEFAULT_SGT_BAND_HZ
    filter_order: int = 4

    def __post_init__(self):
        if self.window_s <= 0:
            raise ArgumentError(f"window_s must be positive, got {self.window_s}")
        if not 0.0 <= self.overlap < 1.0:
            raise ArgumentError(f"overlap must be in [0, 1), got {self.overlap}")


@dataclass
class SgtLabels:
    """Surrogate supervision labels: a band-limited pulse plus provenance."""

    pulse: PulseSignal
    method: Method
    band: tuple[float, float]
    source_roi: Roi


def _window_starts(n: int, length: int, hop: int) -> list[int]:
    starts = list(range(0, n - length + 1, hop))
    if starts[-1] != n - length:
        starts.append(n - length)  # tail window so every sample is covered
    return starts


def _normalized(window: np.ndarray) -> np.ndarray | None:
    mean = window.mean()
    if mean == 0.0:
        return None
    return window / mean - 1.0


def chrom(trace: RgbTrace, params: ChromParams = ChromParams()) -> PulseSignal:
    """CHROM projection: X = 3r - 2g, Y = 1.5r + g - 1.5b on normalized
    channels, band-filtered per window, combined as S = X - (sx/sy) * Y and
    reassembled by Hann-weighted overlap-add.
    """
    n = len(trace)
    length = int(round(params.window_s * trace.fps))
    if n < length:
        raise ArgumentError(f"trace of {n} samples shorter than one {length}-sample window")
    hop = max(1, int(round(length * (1.0 - params.overlap))))
    spec = _window_filter(params, trace.fps, length)
    taper = hann_window(length)

    degenerate: list[int] = []
    contributions = []
    for idx, start in enumerate(_window_starts(n, length, hop)):
        sl = slice(start, start + length)
        rn = _normalized(trace.r[sl])
        gn = _normalized(trace.g[sl])
        bn = _normalized(trace.b[sl])
        if rn is None or gn is None or bn is None:
            degenerate.append(idx)
            continue
        x = filter_zero_phase(3.0 * rn - 2.0 * gn, spec)
        y = filter_zero_phase(1.5 * rn + gn - 1.5 * bn, spec)
        sy = y.std()
        if sy == 0.0:
            degenerate.append(idx)
            alpha = 0.0
        else:
            alpha = x.std() / sy
        contributions.append((start, (x - alpha * y) * taper, taper))
    samples = _chrom_ola(contributions, n)
    return PulseSignal(samples, trace.fps, trace.t0, degenerate_windows=tuple(degenerate))


def _chrom_ola(contributions, n: int) -> np.ndarray:
    acc = np.zeros(n)
    wacc = np.zeros(n)
    for start, values, taper in contributions:
        acc[start : start + len(values)] += values
        wacc[start : start + len(taper)] += taper
    covered = wacc > 1e-12
    acc[covered] /= wacc[covered]
    acc[~covered] = 0.0
    return acc


def pos(trace: RgbTrace, params: ChromParams = ChromParams()) -> PulseSignal:
    """POS projection: S1 = g - b, S2 = g + b - 2r on normalized channels,
    combined as h = S1 + (s1/s2) * S2, mean-subtracted, overlap-added.
    """
    n = len(trace)
    length = int(round(params.window_s * trace.fps))
    if n < length:
        raise ArgumentError(f"trace of {n} samples shorter than one {length}-sample window")
    hop = max(1, int(round(length * (1.0 - params.overlap))))

    degenerate: list[int] = []
    acc = np.zeros(n)
    wacc = np.zeros(n)
    for idx, start in enumerate(_window_starts(n, length, hop)):
        sl = slice(start, start + length)
        rn = _normalized(trace.r[sl])
        gn = _normalized(trace.g[sl])
        bn = _normalized(trace.b[sl])
        if rn is None or gn is None or bn is None:
            degenerate.append(idx)
            continue
        s1 = gn - bn
        s2 = gn + bn - 2.0 * rn
        sd2 = s2.std()
        if sd2 == 0.0:
            degenerate.append(idx)
            ratio = 0.0
        else:
            ratio = s1.std() / sd2
        h = s1 + ratio * s2
        h = h - h.mean()
        acc[sl] += h
        wacc[sl] += 1.0
    covered = wacc > 0
    acc[covered] /= wacc[covered]
    samples = acc
    return PulseSignal(samples, trace.fps, trace.t0, degenerate_windows=tuple(degenerate))


def _window_filter(params: ChromParams, fps: float, window_len: int) -> FilterSpec:
    low, high = params.band_hz
    spec = butterworth_bandpass(params.filter_order, low, high, fps)
    if window_len <= 3 * spec.order:
        raise ArgumentError(
            f"{window_len}-sample window too short for zero-phase order {spec.order}")
    return spec


_METHODS = {Method.CHROM: chrom, Method.POS: pos}


def generate_sgt(seq: FrameSequence, roi: Roi, method: Method | str = Method.CHROM,
                 band: tuple[float, float] = DEFAULT_SGT_BAND_HZ,
                 params: ChromParams | None = None) -> SgtLabels:
    """Full label pipeline: spatial average, chrominance projection, then a
    zero-phase Butterworth band-pass. One label per input frame.
    """
    if isinstance(method, str):
        method = Method.parse(method)
    low, high = band
    if not (0.0 < low < high < seq.fps / 2):
        raise ArgumentError(
            f"band ({low}, {high}) Hz outside (0, {seq.fps / 2}) Hz for fps {seq.fps}")
    params = replace(params or ChromParams(), band_hz=(low, high))
    trace = spatial_average(seq, roi)
    pulse = _METHODS[method](trace, params)
    spec = butterworth_bandpass(params.filter_order, low, high, seq.fps)
    filtered = filter_zero_phase(pulse.samples, spec)
    labeled = PulseSignal(filtered, pulse.fps, pulse.t0,
                          degenerate_windows=pulse.degenerate_windows)
    return SgtLabels(pulse=labeled, method=method, band=(low, high), source_roi=roi)
