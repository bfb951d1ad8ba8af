"""Frame ingestion and preprocessing: demosaic, downsample, white balance, crop.

Frames are uint8 numpy arrays, (h, w, 3) for RGB and (h, w) for raw Bayer
mosaics. All intermediate arithmetic is floating point; results are
quantized back to 8 bits only when an operation returns a frame.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.signal import convolve2d

from . import pnm
from .errors import ArgumentError, DataError, FormatError


class CfaLayout(enum.Enum):
    RGGB = "rggb"
    BGGR = "bggr"
    GRBG = "grbg"
    GBRG = "gbrg"

    @classmethod
    def parse(cls, name: str) -> "CfaLayout":
        try:
            return cls(name.lower())
        except ValueError:
            raise ArgumentError(f"unknown CFA layout {name!r}") from None


# Channel index (0=R, 1=G, 2=B) of each position in the repeating 2x2 tile.
_CFA_GRID = {
    CfaLayout.RGGB: np.array([[0, 1], [1, 2]]),
    CfaLayout.BGGR: np.array([[2, 1], [1, 0]]),
    CfaLayout.GRBG: np.array([[1, 0], [2, 1]]),
    CfaLayout.GBRG: np.array([[1, 2], [0, 1]]),
}

# Same-channel neighbors reachable inside a 3x3 window: the green sites form
# a checkerboard (cross kernel), red/blue fill the remaining lattice (box).
_KERNEL_CROSS = np.array([[0.0, 1, 0], [1, 1, 1], [0, 1, 0]])
_KERNEL_BOX = np.ones((3, 3))


@dataclass(frozen=True)
class Roi:
    """Pixel rectangle: left, top, width, height."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w <= 0 or self.h <= 0:
            raise ArgumentError(f"roi must have positive size, got {self}")
        if self.x < 0 or self.y < 0:
            raise ArgumentError(f"roi origin must be non-negative, got {self}")

    def fits(self, height: int, width: int) -> bool:
        return self.x + self.w <= width and self.y + self.h <= height

    def require_fits(self, height: int, width: int) -> None:
        if not self.fits(height, width):
            raise ArgumentError(f"{self} does not fit a {width}x{height} frame")

    @property
    def slices(self) -> tuple[slice, slice]:
        return slice(self.y, self.y + self.h), slice(self.x, self.x + self.w)

    @classmethod
    def parse(cls, text: str) -> "Roi":
        parts = text.split(",")
        if len(parts) != 4:
            raise ArgumentError(f"roi must be 'x,y,w,h', got {text!r}")
        try:
            x, y, w, h = (int(p) for p in parts)
        except ValueError:
            raise ArgumentError(f"roi components must be integers, got {text!r}") from None
        return cls(x, y, w, h)

    def to_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "w": self.w, "h": self.h}


@dataclass
class RawBayerFrame:
    """Single-channel mosaic straight off the sensor."""

    samples: np.ndarray  # (h, w) uint8
    layout: CfaLayout

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.uint8)
        if self.samples.ndim != 2:
            raise ArgumentError(f"bayer frame must be 2-D, got shape {self.samples.shape}")
        h, w = self.samples.shape
        if h % 2 or w % 2:
            raise ArgumentError(f"bayer frame dimensions must be even, got {w}x{h}")

    @property
    def height(self) -> int:
        return self.samples.shape[0]

    @property
    def width(self) -> int:
        return self.samples.shape[1]


@dataclass
class FrameSequence:
    """Ordered RGB frames at a fixed rate; the pipeline's raw input."""

    frames: np.ndarray  # (n, h, w, 3) uint8, acquisition order
    fps: float
    source_id: str = ""

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=np.uint8)
        if self.frames.ndim != 4 or self.frames.shape[3] != 3:
            raise ArgumentError(f"frames must be (n, h, w, 3), got {self.frames.shape}")
        if self.fps <= 0:
            raise ArgumentError(f"fps must be positive, got {self.fps}")

    def __len__(self) -> int:
        return self.frames.shape[0]

    @property
    def frame_shape(self) -> tuple[int, int]:
        return self.frames.shape[1], self.frames.shape[2]


def ensure_rgb_frame(frame: np.ndarray) -> np.ndarray:
    frame = np.asarray(frame)
    if frame.ndim != 3 or frame.shape[2] != 3 or frame.dtype != np.uint8:
        raise ArgumentError(f"expected (h, w, 3) uint8 frame, got {frame.shape} {frame.dtype}")
    return frame


def demosaic_bilinear(raw: RawBayerFrame) -> np.ndarray:
    """Interpolate a Bayer mosaic to a full-resolution RGB frame.

    Sampled positions keep their raw value exactly; missing values are the
    arithmetic mean of the available same-channel neighbors (2 or 4 in the
    interior, fewer at borders, equivalent to replicating edge samples).
    """
    h, w = raw.samples.shape
    grid = _CFA_GRID[raw.layout]
    chan = np.tile(grid, (h // 2, w // 2))
    samples = raw.samples.astype(np.float64)
    out = np.empty((h, w, 3), dtype=np.float64)
    for c in range(3):
        mask = (chan == c).astype(np.float64)
        kernel = _KERNEL_CROSS if c == 1 else _KERNEL_BOX
        total = convolve2d(samples * mask, kernel, mode="same")
        count = convolve2d(mask, kernel, mode="same")
        out[:, :, c] = total / count
    return np.rint(out).astype(np.uint8)


def downsample(frame: np.ndarray, factor: int) -> np.ndarray:
    """Box-filter spatial downsample: each output pixel is the rounded mean
    of its factor x factor block. Trailing rows/cols that do not fill a
    block are dropped.
    """
    frame = ensure_rgb_frame(frame)
    if factor < 1:
        raise ArgumentError(f"downsample factor must be >= 1, got {factor}")
    if factor == 1:
        return frame.copy()
    h, w = frame.shape[:2]
    oh, ow = h // factor, w // factor
    if oh == 0 or ow == 0:
        raise ArgumentError(f"factor {factor} larger than frame {w}x{h}")
    x = frame[: oh * factor, : ow * factor].astype(np.float64)
    x = x.reshape(oh, factor, ow, factor, 3).mean(axis=(1, 3))
    return np.rint(x).astype(np.uint8)


def gray_world_balance(frame: np.ndarray) -> np.ndarray:
    """Rescale channels so their means match the frame's grand mean."""
    frame = ensure_rgb_frame(frame)
    x = frame.astype(np.float64)
    means = x.reshape(-1, 3).mean(axis=0)
    if np.any(means == 0.0):
        raise DataError("gray-world balance undefined for a zero-mean channel")
    gains = means.mean() / means
    return np.clip(np.rint(x * gains), 0, 255).astype(np.uint8)


def crop_roi(frame: np.ndarray, roi: Roi) -> np.ndarray:
    frame = ensure_rgb_frame(frame)
    roi.require_fits(frame.shape[0], frame.shape[1])
    ys, xs = roi.slices
    return frame[ys, xs].copy()


# ---------------------------------------------------------------------------
# Frame directory format: frame_000001.ppm/.pgm ... plus sidecar meta.json.

_COLORS = ("rgb", "bayer", "gray")


def read_meta(directory: str | Path) -> dict:
    path = Path(directory) / "meta.json"
    if not path.is_file():
        raise FormatError(f"missing metadata: {path}")
    try:
        meta = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from exc
    fps = meta.get("fps")
    if not isinstance(fps, (int, float)) or fps <= 0:
        raise FormatError(f"{path}: 'fps' must be a positive number")
    color = meta.get("color")
    if color not in _COLORS:
        raise FormatError(f"{path}: 'color' must be one of {_COLORS}")
    if color == "bayer" and "cfa" not in meta:
        raise FormatError(f"{path}: 'cfa' required when color is 'bayer'")
    return meta


def write_meta(directory: str | Path, fps: float, color: str, cfa: str | None = None,
               source_id: str | None = None) -> None:
    meta: dict = {"fps": fps, "color": color}
    if cfa is not None:
        meta["cfa"] = cfa
    if source_id:
        meta["source_id"] = source_id
    pnm.atomic_write_text(Path(directory) / "meta.json", json.dumps(meta, indent=2) + "\n")


def _frame_files(directory: Path) -> list[Path]:
    files = sorted(p for p in directory.iterdir()
                   if p.is_file() and p.suffix in (".ppm", ".pgm"))
    if not files:
        raise FormatError(f"no frame files in {directory}")
    return files


def load_frame_stack(directory: str | Path) -> tuple[np.ndarray, dict]:
    """Load every frame in lexical filename order into one array.

    Returns (stack, meta) where stack is (n, h, w, 3) for color 'rgb' and
    (n, h, w) for 'bayer'/'gray'.
    """
    directory = Path(directory)
    meta = read_meta(directory)
    arrays = []
    for path in _frame_files(directory):
        arr = pnm.read_pnm(path)
        want_rgb = meta["color"] == "rgb"
        if (arr.ndim == 3) != want_rgb:
            raise FormatError(f"{path}: pixel layout does not match meta color {meta['color']!r}")
        if arrays and arr.shape != arrays[0].shape:
            raise FormatError(
                f"{path}: inconsistent frame dimensions {arr.shape} vs {arrays[0].shape}")
        arrays.append(arr)
    return np.stack(arrays), meta


def load_sequence(path: str | Path, meta: dict | None = None) -> FrameSequence:
    """Load an RGB frame directory as a FrameSequence.

    `meta` overrides fields of the sidecar meta.json when given.
    """
    stack, file_meta = load_frame_stack(path)
    if meta:
        file_meta = {**file_meta, **meta}
    if file_meta["color"] != "rgb":
        raise FormatError(f"{path}: expected color 'rgb', got {file_meta['color']!r}")
    return FrameSequence(stack, float(file_meta["fps"]),
                         source_id=file_meta.get("source_id", Path(path).name))


def load_bayer_frames(path: str | Path, cfa: str | None = None) -> tuple[list[RawBayerFrame], dict]:
    stack, meta = load_frame_stack(path)
    if meta["color"] != "bayer":
        raise FormatError(f"{path}: expected color 'bayer', got {meta['color']!r}")
    layout = CfaLayout.parse(cfa if cfa is not None else meta["cfa"])
    return [RawBayerFrame(frame, layout) for frame in stack], meta


def save_frame_stack(directory: str | Path, stack: np.ndarray, fps: float, color: str,
                     cfa: str | None = None, source_id: str | None = None) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    ext = ".ppm" if stack.ndim == 4 else ".pgm"
    for i, frame in enumerate(stack):
        pnm.write_pnm(directory / f"frame_{i + 1:06d}{ext}", frame)
    write_meta(directory, fps, color, cfa=cfa, source_id=source_id)


def save_sequence(directory: str | Path, seq: FrameSequence) -> None:
    save_frame_stack(directory, seq.frames, seq.fps, "rgb", source_id=seq.source_id)
