"""Windowed spectral heart-rate estimation and amplitude-based HR filtering."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dsp import default_nfft, hann_window, magnitude_spectrum
from .errors import ArgumentError, DataError
from .rppg import PulseSignal

DEFAULT_BAND_BPM = (90.0, 240.0)
SNR_GUARD_HZ = 0.2


@dataclass
class HrSeries:
    """Heart-rate estimates on a sliding-window grid.

    t_s holds window-center timestamps; valid marks windows that survived
    filtering. all_invalid is a diagnostic flag set when filtering rejected
    every window and the bpm values were left as estimated.
    """

    t_s: np.ndarray
    bpm: np.ndarray
    valid: np.ndarray
    window_s: float
    stride_s: float
    band_bpm: tuple[float, float] = DEFAULT_BAND_BPM
    all_invalid: bool = False

    def __post_init__(self):
        self.t_s = np.asarray(self.t_s, dtype=np.float64)
        self.bpm = np.asarray(self.bpm, dtype=np.float64)
        self.valid = np.asarray(self.valid, dtype=bool)
        if not (len(self.t_s) == len(self.bpm) == len(self.valid)):
            raise ArgumentError("t_s, bpm and valid must have equal lengths")
        if len(self.t_s) > 1 and not np.all(np.diff(self.t_s) > 0):
            raise ArgumentError("window timestamps must be strictly increasing")
        if self.window_s <= 0 or self.stride_s <= 0:
            raise ArgumentError("window_s and stride_s must be positive")

    def __len__(self) -> int:
        return len(self.t_s)


@dataclass(frozen=True)
class AmplitudeFilterParams:
    context_s: float = 30.0
    z_max: float = 3.0
    min_snr_db: float = 2.0

    def __post_init__(self):
        if self.z_max <= 0:
            raise ArgumentError(f"z_max must be positive, got {self.z_max}")
        if self.context_s <= 0:
            raise ArgumentError(f"context_s must be positive, got {self.context_s}")


def _window_grid(n: int, fps: float, window_s: float, stride_s: float) -> tuple[int, int, int]:
    window = int(round(window_s * fps))
    stride = int(round(stride_s * fps))
    if window < 2:
        raise ArgumentError(f"window of {window} samples is too short")
    if stride < 1:
        raise ArgumentError(f"stride of {stride} samples is too short")
    if n < window:
        raise DataError(f"pulse of {n} samples shorter than one {window}-sample window")
    count = (n - window) // stride + 1
    return window, stride, count


def _band_peak(segment: np.ndarray, fps: float, band_bpm: tuple[float, float],
               taper: np.ndarray):
    """Spectral peak of one detrended, Hann-weighted window. Returns the peak
    frequency (Hz) plus the in-band freqs/magnitudes for SNR inspection."""
    seg = (segment - segment.mean()) * taper
    spectrum = magnitude_spectrum(seg, fps, nfft=default_nfft(len(seg)))
    lo, hi = band_bpm
    mask = (spectrum.freqs_hz * 60.0 >= lo) & (spectrum.freqs_hz * 60.0 <= hi)
    if not np.any(mask):
        raise ArgumentError(f"band {band_bpm} bpm contains no spectral bins")
    freqs = spectrum.freqs_hz[mask]
    mags = spectrum.magnitudes[mask]
    return freqs[int(np.argmax(mags))], freqs, mags


def estimate_hr(pulse: PulseSignal, window_s: float = 10.0, stride_s: float = 1.0,
                band_bpm: tuple[float, float] = DEFAULT_BAND_BPM) -> HrSeries:
    """Sliding-window FFT peak HR. Each window is mean-subtracted, Hann
    weighted and zero padded; HR is 60 times the in-band argmax frequency.
    """
    lo, hi = band_bpm
    if not (0.0 < lo < hi < pulse.fps / 2 * 60.0):
        raise ArgumentError(
            f"band {band_bpm} bpm outside (0, {pulse.fps / 2 * 60.0}) for fps {pulse.fps}")
    n = len(pulse)
    window, stride, count = _window_grid(n, pulse.fps, window_s, stride_s)
    taper = hann_window(window)
    t_s = np.empty(count)
    bpm = np.empty(count)
    for k in range(count):
        start = k * stride
        peak_hz, _, _ = _band_peak(pulse.samples[start : start + window],
                                   pulse.fps, band_bpm, taper)
        bpm[k] = peak_hz * 60.0
        t_s[k] = pulse.t0 + (start + window / 2.0) / pulse.fps
    return HrSeries(t_s, bpm, np.ones(count, dtype=bool), window_s, stride_s,
                    band_bpm=(lo, hi))


def _robust_z(value: float, context: np.ndarray) -> float:
    med = float(np.median(context))
    mad = float(np.median(np.abs(context - med)))
    # overlapping windows often share the exact same extremes, collapsing the
    # MAD to 0; the floor makes sub-10%-of-median deviations never outliers
    scale = max(1.4826 * mad, 0.1 * abs(med), 1e-12)
    return abs(value - med) / scale


def _window_snr_db(segment: np.ndarray, fps: float, band_bpm: tuple[float, float],
                   taper: np.ndarray) -> float:
    """Power within a guard band around the spectral peak versus the rest of
    the search band, in dB. Pure tones score high; broadband noise scores
    below 0 dB because most band power sits away from its peak."""
    peak_hz, freqs, mags = _band_peak(segment, fps, band_bpm, taper)
    near = np.abs(freqs - peak_hz) <= SNR_GUARD_HZ
    signal = float(np.sum(mags[near] ** 2))
    rest = float(np.sum(mags[~near] ** 2))
    if signal == 0.0:
        return -np.inf
    if rest == 0.0:
        return np.inf
    return 10.0 * np.log10(signal / rest)


def amplitude_filter(hr: HrSeries, pulse: PulseSignal,
                     params: AmplitudeFilterParams = AmplitudeFilterParams()) -> HrSeries:
    """Invalidate windows whose pulse amplitude is a robust-z outlier against
    the rolling context, or whose spectrum lacks a dominant peak; invalid bpm
    values are linearly interpolated from the nearest valid neighbors.
    """
    if params.context_s < hr.window_s:
        raise ArgumentError(
            f"context_s {params.context_s} shorter than window_s {hr.window_s}")
    window, stride, count = _window_grid(len(pulse), pulse.fps, hr.window_s, hr.stride_s)
    if count != len(hr):
        raise DataError(
            f"HR series has {len(hr)} windows but pulse yields {count}")
    taper = hann_window(window)

    ptp = np.empty(count)
    snr_db = np.empty(count)
    for k in range(count):
        segment = pulse.samples[k * stride : k * stride + window]
        ptp[k] = float(np.ptp(segment))
        snr_db[k] = _window_snr_db(segment, pulse.fps, hr.band_bpm, taper)

    valid = hr.valid.copy()
    half = params.context_s / 2.0
    for k in range(count):
        context = ptp[np.abs(hr.t_s - hr.t_s[k]) <= half]
        if _robust_z(ptp[k], context) > params.z_max:
            valid[k] = False
        if snr_db[k] < params.min_snr_db:
            valid[k] = False

    bpm = hr.bpm.copy()
    if not np.any(valid):
        return HrSeries(hr.t_s.copy(), bpm, np.zeros(count, dtype=bool),
                        hr.window_s, hr.stride_s, band_bpm=hr.band_bpm,
                        all_invalid=True)
    if not np.all(valid):
        # np.interp clamps outside the valid range: edge windows take the
        # nearest valid value rather than an extrapolated trend
        bpm[~valid] = np.interp(hr.t_s[~valid], hr.t_s[valid], hr.bpm[valid])
    return HrSeries(hr.t_s.copy(), bpm, valid, hr.window_s, hr.stride_s,
                    band_bpm=hr.band_bpm)
