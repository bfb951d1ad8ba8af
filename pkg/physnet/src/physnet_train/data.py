"""Clip-directory loading and mini-batch assembly.

A clip directory is the exchange format of the extraction pipeline: binary
PPM/PGM frames named frame_%06d, a labels.csv with global
frame_index,time_s,ppg rows, and a clip.json manifest. split.json at the
collection root assigns clips to train/val. Everything is consumed from
files; no code is shared with the producer.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .errors import DataError, FormatError


def _read_pnm(path: Path) -> np.ndarray:
    """Binary PPM (P6) or PGM (P5) with maxval 255."""
    data = path.read_bytes()
    pos = 0

    def token() -> bytes:
        nonlocal pos
        while pos < len(data):
            if data[pos : pos + 1].isspace():
                pos += 1
            elif data[pos : pos + 1] == b"#":
                while pos < len(data) and data[pos : pos + 1] != b"\n":
                    pos += 1
            else:
                break
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError(f"{path}: truncated header")
        return data[start:pos]

    magic = token()
    if magic not in (b"P5", b"P6"):
        raise FormatError(f"{path}: unsupported magic {magic!r}")
    width, height, maxval = int(token()), int(token()), int(token())
    if maxval != 255:
        raise FormatError(f"{path}: maxval {maxval} not supported")
    pos += 1  # single whitespace byte after maxval
    channels = 3 if magic == b"P6" else 1
    need = width * height * channels
    if len(data) - pos < need:
        raise FormatError(f"{path}: raster truncated")
    raster = np.frombuffer(data, dtype=np.uint8, count=need, offset=pos)
    if channels == 3:
        return raster.reshape(height, width, 3)
    return raster.reshape(height, width)


@dataclass
class Clip:
    """One training example: frame tensor plus its aligned label series."""

    tensor: torch.Tensor  # (channels, frames, H, W) float32 in [0, 1]
    labels: torch.Tensor  # (frames,) float32
    frame_index: np.ndarray
    time_s: np.ndarray
    fps: float
    name: str
    manifest: dict

    def __post_init__(self):
        c, t = self.tensor.shape[:2]
        if c not in (1, 3):
            raise DataError(f"{self.name}: {c} channels, expected 1 or 3")
        if len(self.labels) != t:
            raise DataError(
                f"{self.name}: {len(self.labels)} labels for {t} frames")

    @property
    def channels(self) -> int:
        return int(self.tensor.shape[0])

    @property
    def n_frames(self) -> int:
        return int(self.tensor.shape[1])


def _read_labels(path: Path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if not path.is_file():
        raise FormatError(f"missing label file {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["frame_index", "time_s", "ppg"]:
            raise FormatError(f"{path}: unexpected header {header!r}")
        rows = [row for row in reader if row]
    try:
        idx = np.array([int(r[0]) for r in rows])
        t = np.array([float(r[1]) for r in rows])
        ppg = np.array([float(r[2]) for r in rows])
    except (ValueError, IndexError) as exc:
        raise FormatError(f"{path}: bad row ({exc})") from None
    return idx, t, ppg


def load_clip(clip_dir) -> Clip:
    clip_dir = Path(clip_dir)
    manifest_path = clip_dir / "clip.json"
    if not manifest_path.is_file():
        raise FormatError(f"missing manifest {manifest_path}")
    manifest = json.loads(manifest_path.read_text())
    frame_paths = sorted(clip_dir.glob("frame_*.p[pg]m"))
    if not frame_paths:
        raise FormatError(f"{clip_dir} holds no frames")
    frames = np.stack([_read_pnm(p) for p in frame_paths])
    if frames.ndim == 3:
        frames = frames[:, :, :, None]
    idx, t, ppg = _read_labels(clip_dir / "labels.csv")
    if len(idx) != len(frames):
        raise DataError(f"{clip_dir}: {len(idx)} label rows for "
                        f"{len(frames)} frames")
    tensor = torch.from_numpy(
        frames.astype(np.float32) / 255.0).permute(3, 0, 1, 2).contiguous()
    return Clip(tensor=tensor,
                labels=torch.from_numpy(ppg.astype(np.float32)),
                frame_index=idx, time_s=t,
                fps=float(manifest.get("fps", 0.0)) or _infer_fps(t),
                name=clip_dir.name, manifest=manifest)


def _infer_fps(times: np.ndarray) -> float:
    if len(times) < 2:
        raise DataError("cannot infer fps from fewer than two label rows")
    return 1.0 / float(np.diff(times).mean())


def load_split(clips_dir) -> dict:
    path = Path(clips_dir) / "split.json"
    if not path.is_file():
        raise FormatError(f"missing split manifest {path}")
    split = json.loads(path.read_text())
    for key in ("train", "val"):
        if key not in split:
            raise FormatError(f"{path}: missing {key!r} list")
    return split


def list_clips(clips_dir) -> list[str]:
    root = Path(clips_dir)
    names = sorted(p.name for p in root.iterdir()
                   if p.is_dir() and (p / "clip.json").is_file())
    if not names:
        raise DataError(f"{root} holds no clip directories")
    return names


def load_clips(clips_dir, names) -> list[Clip]:
    """Eagerly loads the named clips; the harness is toy-scale by contract,
    so whole-split residency is cheap and keeps epochs I/O-free."""
    root = Path(clips_dir)
    clips = [load_clip(root / name) for name in names]
    if not clips:
        raise DataError("empty clip list")
    channels = clips[0].channels
    for clip in clips[1:]:
        if clip.channels != channels:
            raise DataError(f"{clip.name}: channel count {clip.channels} "
                            f"differs from {channels}")
    return clips


def normalize_batch(x: torch.Tensor) -> torch.Tensor:
    """Standardize a batch frame tensor by its own mean and sd.

    A constant batch maps to zeros via the clamped denominator rather than
    dividing by zero.
    """
    std = x.std().clamp(min=1e-8)
    return (x - x.mean()) / std


def batch_tensors(clips: list[Clip]) -> tuple[torch.Tensor, torch.Tensor]:
    shapes = {tuple(c.tensor.shape) for c in clips}
    if len(shapes) != 1:
        raise DataError(f"cannot batch mixed clip shapes {sorted(shapes)}")
    x = torch.stack([c.tensor for c in clips])
    y = torch.stack([c.labels for c in clips])
    return x, y


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_pulse_csv(path, frame_index, time_s, values) -> None:
    """frame_index,time_s,ppg rows with repr() floats: the producer's label
    contract, so downstream spectral tooling consumes predictions unchanged."""
    lines = ["frame_index,time_s,ppg"]
    for i, t, v in zip(frame_index, time_s, values):
        lines.append(f"{int(i)},{float(t)!r},{float(v)!r}")
    atomic_write_text(path, "\n".join(lines) + "\n")
