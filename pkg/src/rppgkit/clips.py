"""Fixed-length training-clip export: tiles a labeled recording into
148-frame segments resized to 128x128, each with its matching label rows and
manifest, plus a seeded train/validation split file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .csvio import _fmt, _write_csv, PULSE_HEADER
from .errors import ArgumentError, DataError
from .frames import FrameSequence, Roi, save_frame_stack
from .pnm import atomic_write_text
from .rppg import PulseSignal

CLIP_FRAMES = 148
CLIP_SIZE = 128
RESIZE_MODES = ("bilinear", "nearest")


def _linear_coords(dst: int, src: int):
    """Half-pixel-centered source coordinates for a separable resize."""
    x = (np.arange(dst) + 0.5) * (src / dst) - 0.5
    x = np.clip(x, 0.0, src - 1.0)
    lo = np.floor(x).astype(np.intp)
    hi = np.minimum(lo + 1, src - 1)
    return lo, hi, x - lo


def resize_frame(frame: np.ndarray, out_h: int, out_w: int,
                 mode: str = "bilinear") -> np.ndarray:
    if mode not in RESIZE_MODES:
        raise ArgumentError(f"resize mode must be one of {RESIZE_MODES}, got {mode!r}")
    arr = np.asarray(frame, dtype=np.float64)
    squeeze = arr.ndim == 2
    if squeeze:
        arr = arr[:, :, None]
    if arr.ndim != 3:
        raise ArgumentError(f"frame must be 2-D or 3-D, got shape {frame.shape}")
    h, w = arr.shape[:2]
    if mode == "nearest":
        ys = np.minimum(((np.arange(out_h) + 0.5) * h / out_h).astype(np.intp), h - 1)
        xs = np.minimum(((np.arange(out_w) + 0.5) * w / out_w).astype(np.intp), w - 1)
        out = arr[np.ix_(ys, xs)]
    else:
        ylo, yhi, fy = _linear_coords(out_h, h)
        xlo, xhi, fx = _linear_coords(out_w, w)
        fy = fy[:, None, None]
        fx = fx[None, :, None]
        top = arr[np.ix_(ylo, xlo)] * (1 - fx) + arr[np.ix_(ylo, xhi)] * fx
        bot = arr[np.ix_(yhi, xlo)] * (1 - fx) + arr[np.ix_(yhi, xhi)] * fx
        out = top * (1 - fy) + bot * fy
    out = np.clip(np.rint(out), 0, 255).astype(np.uint8)
    return out[:, :, 0] if squeeze else out


@dataclass(frozen=True)
class ClipExportConfig:
    clip_len: int = CLIP_FRAMES
    stride: int = CLIP_FRAMES
    size: int = CLIP_SIZE
    mode: str = "bilinear"
    split_ratio: float = 0.6
    seed: int = 42

    def __post_init__(self):
        if self.clip_len < 1 or self.stride < 1 or self.size < 1:
            raise ArgumentError("clip_len, stride and size must be positive")
        if self.mode not in RESIZE_MODES:
            raise ArgumentError(f"resize mode must be one of {RESIZE_MODES}")
        if not 0.0 < self.split_ratio < 1.0:
            raise ArgumentError(f"split_ratio must be in (0, 1), got {self.split_ratio}")


def export_clips(seq: FrameSequence, labels: PulseSignal, outdir,
                 config: ClipExportConfig = ClipExportConfig(),
                 roi: Roi | None = None) -> list[str]:
    """Write non-overlapping (by default) clips under outdir plus split.json.

    Returns the clip directory names in index order; empty when the
    recording is shorter than one clip.
    """
    if len(labels) != len(seq):
        raise DataError(
            f"label count {len(labels)} does not match frame count {len(seq)}")
    n = len(seq)
    if n < config.clip_len:
        return []
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    count = (n - config.clip_len) // config.stride + 1
    times = labels.times
    names = []
    for c in range(count):
        start = c * config.stride
        name = f"clip_{c + 1:06d}"
        clip_dir = outdir / name
        resized = np.stack([
            resize_frame(seq.frames[start + j], config.size, config.size, config.mode)
            for j in range(config.clip_len)])
        save_frame_stack(clip_dir, resized, seq.fps, "rgb", source_id=seq.source_id)
        rows = ((start + j, _fmt(times[start + j]), _fmt(labels.samples[start + j]))
                for j in range(config.clip_len))
        _write_csv(clip_dir / "labels.csv", PULSE_HEADER, rows)
        manifest = {
            "clip_index": c,
            "source_id": seq.source_id,
            "start_frame": start,
            "n_frames": config.clip_len,
            "fps": seq.fps,
            "size": config.size,
            "resize": config.mode,
            "roi": roi.to_dict() if roi is not None else None,
        }
        atomic_write_text(clip_dir / "clip.json", json.dumps(manifest, indent=2) + "\n")
        names.append(name)
    write_split(outdir, names, config.split_ratio, config.seed)
    return names


def write_split(outdir, names: list[str], ratio: float, seed: int) -> None:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    order = np.random.default_rng(seed).permutation(len(names))
    n_train = int(round(ratio * len(names)))
    train = sorted(names[i] for i in order[:n_train])
    val = sorted(names[i] for i in order[n_train:])
    payload = {"seed": seed, "ratio": ratio, "train": train, "val": val}
    atomic_write_text(outdir / "split.json", json.dumps(payload, indent=2) + "\n")


def read_split(outdir) -> dict:
    path = Path(outdir) / "split.json"
    if not path.is_file():
        raise DataError(f"missing split manifest {path}")
    return json.loads(path.read_text())
