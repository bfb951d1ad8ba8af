"""Signal-processing primitives: Butterworth band-pass, windows, spectra."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import signal as sps

from .errors import ArgumentError

DEFAULT_NFFT_FLOOR = 4096


@dataclass(frozen=True)
class FilterSpec:
    """Discrete band-pass filter.

    `order` is the analog low-pass prototype order; the band-pass transfer
    function has twice as many poles, applied as cascaded second-order
    sections. `b`/`a` hold the equivalent single transfer function for
    inspection.
    """

    order: int
    band_hz: tuple[float, float]
    fs: float
    b: np.ndarray
    a: np.ndarray
    sos: np.ndarray

    def poles(self) -> np.ndarray:
        return np.concatenate([np.roots(section[3:]) for section in self.sos])

    def to_json(self) -> str:
        return json.dumps({
            "order": self.order,
            "band_hz": list(self.band_hz),
            "fs": self.fs,
            "b": self.b.tolist(),
            "a": self.a.tolist(),
        })


def butterworth_bandpass(order: int, low_hz: float, high_hz: float, fs: float) -> FilterSpec:
    """Design a Butterworth band-pass (bilinear transform, pre-warped edges)."""
    if order < 1:
        raise ArgumentError(f"filter order must be >= 1, got {order}")
    if not (0.0 < low_hz < high_hz < fs / 2):
        raise ArgumentError(
            f"band ({low_hz}, {high_hz}) Hz must satisfy 0 < low < high < fs/2 = {fs / 2}")
    sos = sps.butter(order, [low_hz, high_hz], btype="bandpass", fs=fs, output="sos")
    b, a = sps.sos2tf(sos)
    spec = FilterSpec(order=order, band_hz=(low_hz, high_hz), fs=fs, b=b, a=a, sos=sos)
    assert np.all(np.abs(spec.poles()) < 1.0), "unstable filter design"
    return spec


def filter_forward(samples: np.ndarray, spec: FilterSpec) -> np.ndarray:
    """Causal pass through the filter, zero initial state."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.size == 0:
        raise ArgumentError("cannot filter an empty signal")
    return sps.sosfilt(spec.sos, samples)


def filter_zero_phase(samples: np.ndarray, spec: FilterSpec) -> np.ndarray:
    """Forward-backward filtering: squared magnitude response, zero phase.

    Edges are handled by reflective padding of 3 * order samples, so the
    signal must be longer than that.
    """
    samples = np.asarray(samples, dtype=np.float64)
    pad = 3 * spec.order
    if samples.size <= pad:
        raise ArgumentError(
            f"zero-phase filtering needs more than {pad} samples, got {samples.size}")
    padded = np.pad(samples, pad, mode="reflect")
    out = sps.sosfilt(spec.sos, padded)[::-1]
    out = sps.sosfilt(spec.sos, out)[::-1]
    return out[pad:-pad]


def hann_window(n: int) -> np.ndarray:
    """Symmetric Hann taper: 0.5 * (1 - cos(2 pi k / (n - 1)))."""
    if n < 2:
        raise ArgumentError(f"window length must be >= 2, got {n}")
    k = np.arange(n)
    return 0.5 * (1.0 - np.cos(2.0 * np.pi * k / (n - 1)))


@dataclass(frozen=True)
class Spectrum:
    freqs_hz: np.ndarray
    magnitudes: np.ndarray
    nfft: int


def default_nfft(window_len: int) -> int:
    """Smallest power of two >= max(DEFAULT_NFFT_FLOOR, window_len)."""
    n = max(DEFAULT_NFFT_FLOOR, window_len)
    return 1 << (n - 1).bit_length()


def magnitude_spectrum(samples: np.ndarray, fs: float,
                       nfft: int | None = None) -> Spectrum:
    """Zero-padded real-input magnitude spectrum for bins 0 .. nfft/2."""
    samples = np.asarray(samples, dtype=np.float64)
    if nfft is None:
        nfft = default_nfft(samples.size)
    if nfft < samples.size:
        raise ArgumentError(f"nfft {nfft} smaller than signal length {samples.size}")
    if nfft < 2 or nfft & (nfft - 1):
        raise ArgumentError(f"nfft must be a power of two, got {nfft}")
    mags = np.abs(np.fft.rfft(samples, nfft))
    freqs = np.fft.rfftfreq(nfft, d=1.0 / fs)
    return Spectrum(freqs_hz=freqs, magnitudes=mags, nfft=nfft)
