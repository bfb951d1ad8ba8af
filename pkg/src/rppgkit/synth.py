"""Synthetic pulsatile-video generator with closed-form ground truth.

A rectangular skin region carries a per-channel sinusoidal intensity
modulation whose instantaneous frequency is either constant or a linear
chirp; everything else (noise, flicker, motion) is optional corruption. The
injected waveform and the window-averaged HR are both known exactly, so the
whole extraction pipeline can be verified end to end.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .csvio import write_hr_csv, write_pulse_csv
from .errors import ArgumentError
from .frames import _CFA_GRID, CfaLayout, FrameSequence, Roi, save_frame_stack, save_sequence
from .hr import HrSeries
from .rppg import PulseSignal

BACKGROUND_RGB = (90.0, 90.0, 90.0)
JITTER_FREQ_HZ = 0.25
DEFAULT_BASE_RGB = (150.0, 100.0, 80.0)
DEFAULT_PULSE_AMP_RGB = (0.8, 1.5, 0.6)


@dataclass(frozen=True)
class SynthConfig:
    width: int = 64
    height: int = 64
    fps: float = 25.0
    duration_s: float = 60.0
    skin_region: Roi | None = None
    base_rgb: tuple[float, float, float] = DEFAULT_BASE_RGB
    pulse_bpm: float | tuple[float, float] = 120.0
    pulse_amp_rgb: tuple[float, float, float] = DEFAULT_PULSE_AMP_RGB
    noise_sigma: float = 0.0
    flicker: tuple[float, float] | None = None
    jitter_px: int = 0
    seed: int = 42

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ArgumentError("frame dimensions must be positive")
        if self.fps <= 0 or self.duration_s <= 0:
            raise ArgumentError("fps and duration_s must be positive")
        if self.skin_region is None:
            region = Roi(self.width // 4, self.height // 4,
                         max(1, self.width // 2), max(1, self.height // 2))
            object.__setattr__(self, "skin_region", region)
        self.skin_region.require_fits(self.height, self.width)
        lo, hi = self.bpm_range
        for f_hz in (lo / 60.0, hi / 60.0):
            if not 0.0 < f_hz < self.fps / 2:
                raise ArgumentError(
                    f"pulse frequency {f_hz} Hz outside (0, {self.fps / 2}) Hz")
        if any(a < 0 for a in self.pulse_amp_rgb):
            raise ArgumentError("pulse amplitudes must be non-negative")
        if self.noise_sigma < 0:
            raise ArgumentError("noise_sigma must be non-negative")
        if self.flicker is not None:
            freq, amp = self.flicker
            if freq <= 0 or amp < 0:
                raise ArgumentError(f"invalid flicker ({freq}, {amp})")
        if self.jitter_px < 0:
            raise ArgumentError("jitter_px must be non-negative")

    @property
    def bpm_range(self) -> tuple[float, float]:
        if isinstance(self.pulse_bpm, (int, float)):
            return float(self.pulse_bpm), float(self.pulse_bpm)
        start, end = self.pulse_bpm
        return float(start), float(end)

    @property
    def n_frames(self) -> int:
        return int(round(self.duration_s * self.fps))

    def phase(self, t) -> np.ndarray:
        """Accumulated phase of the (possibly chirped) pulse at time t."""
        f0 = self.bpm_range[0] / 60.0
        f1 = self.bpm_range[1] / 60.0
        slope = (f1 - f0) / self.duration_s
        t = np.asarray(t, dtype=np.float64)
        return 2.0 * np.pi * (f0 * t + 0.5 * slope * t * t)

    def mean_bpm(self, t_a: float, t_b: float) -> float:
        """Mean instantaneous HR over [t_a, t_b], from the phase integral."""
        if t_b <= t_a:
            raise ArgumentError("window must have positive span")
        return float((self.phase(t_b) - self.phase(t_a))
                     / (2.0 * np.pi * (t_b - t_a)) * 60.0)


@dataclass
class SynthTruth:
    pulse: PulseSignal
    hr: HrSeries


def _jitter_offsets(config: SynthConfig, t: float) -> tuple[int, int]:
    theta = 2.0 * np.pi * JITTER_FREQ_HZ * t
    dx = int(round(config.jitter_px * np.sin(theta)))
    dy = int(round(config.jitter_px * np.cos(theta)))
    roi = config.skin_region
    dx = int(np.clip(dx, -roi.x, config.width - roi.w - roi.x))
    dy = int(np.clip(dy, -roi.y, config.height - roi.h - roi.y))
    return dx, dy


def generate(config: SynthConfig) -> tuple[FrameSequence, SynthTruth]:
    """Render the configured sequence and return it with its ground truth.

    Noise is drawn from a per-frame counter-keyed substream of the seed, so
    output is bit-reproducible and frames are independent.
    """
    n = config.n_frames
    base = np.asarray(config.base_rgb, dtype=np.float64)
    amps = np.asarray(config.pulse_amp_rgb, dtype=np.float64)
    background = np.asarray(BACKGROUND_RGB, dtype=np.float64)
    times = np.arange(n) / config.fps
    waveform = np.sin(config.phase(times))

    frames = np.empty((n, config.height, config.width, 3), dtype=np.uint8)
    roi = config.skin_region
    for i in range(n):
        t = times[i]
        frame = np.empty((config.height, config.width, 3), dtype=np.float64)
        frame[:] = background
        dx, dy = _jitter_offsets(config, t) if config.jitter_px else (0, 0)
        region = Roi(roi.x + dx, roi.y + dy, roi.w, roi.h)
        frame[region.slices] = base + amps * waveform[i]
        if config.flicker is not None:
            freq, amp = config.flicker
            frame *= 1.0 + amp * np.sin(2.0 * np.pi * freq * t)
        if config.noise_sigma > 0:
            rng = np.random.default_rng([config.seed, i])
            frame += rng.normal(0.0, config.noise_sigma, frame.shape)
        frames[i] = np.clip(np.rint(frame), 0, 255).astype(np.uint8)

    seq = FrameSequence(frames, config.fps, source_id=f"synth_seed{config.seed}")
    truth = SynthTruth(pulse=PulseSignal(waveform, config.fps),
                       hr=truth_hr(config))
    return seq, truth


def truth_hr(config: SynthConfig, window_s: float = 10.0,
             stride_s: float = 1.0) -> HrSeries:
    """Analytic window-mean HR on the same grid estimate_hr uses."""
    n = config.n_frames
    window = int(round(window_s * config.fps))
    stride = int(round(stride_s * config.fps))
    count = max(0, (n - window) // stride + 1)
    t_s = np.empty(count)
    bpm = np.empty(count)
    for k in range(count):
        a = k * stride / config.fps
        b = (k * stride + window) / config.fps
        t_s[k] = (a + b) / 2.0
        bpm[k] = config.mean_bpm(a, b)
    return HrSeries(t_s, bpm, np.ones(count, dtype=bool), window_s, stride_s)


def remosaic(seq: FrameSequence, layout: CfaLayout) -> np.ndarray:
    """Sample RGB frames through a color filter array: each pixel keeps only
    the channel its CFA cell admits. Inverse-direction oracle for demosaic."""
    n, height, width = len(seq), *seq.frame_shape
    if height % 2 or width % 2:
        raise ArgumentError("CFA mosaics require even frame dimensions")
    grid = _CFA_GRID[layout]
    channel_map = np.empty((height, width), dtype=np.intp)
    for dy in range(2):
        for dx in range(2):
            channel_map[dy::2, dx::2] = grid[dy, dx]
    rows, cols = np.indices((height, width))
    out = np.empty((n, height, width), dtype=np.uint8)
    for i in range(n):
        out[i] = seq.frames[i][rows, cols, channel_map]
    return out


def save_synth(outdir, seq: FrameSequence, truth: SynthTruth) -> None:
    outdir = Path(outdir)
    save_sequence(outdir, seq)
    write_pulse_csv(outdir / "truth_pulse.csv", truth.pulse)
    write_hr_csv(outdir / "truth_hr.csv", truth.hr)


def save_synth_bayer(outdir, seq: FrameSequence, truth: SynthTruth,
                     layout: CfaLayout) -> None:
    outdir = Path(outdir)
    mosaics = remosaic(seq, layout)
    save_frame_stack(outdir, mosaics, seq.fps, "bayer", cfa=layout.value,
                     source_id=seq.source_id)
    write_pulse_csv(outdir / "truth_pulse.csv", truth.pulse)
    write_hr_csv(outdir / "truth_hr.csv", truth.hr)
