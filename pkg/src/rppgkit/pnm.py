"""Binary portable-pixmap I/O: P6 for RGB frames, P5 for single-channel.

Only 8-bit (maxval 255) images are supported, which is all the pipeline
produces or consumes.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import FormatError


def write_pnm(path: str | Path, image: np.ndarray) -> None:
    """Write a uint8 array as P5 (h, w) or P6 (h, w, 3), atomically."""
    image = np.asarray(image)
    if image.dtype != np.uint8:
        raise FormatError(f"expected uint8 image, got {image.dtype}")
    if image.ndim == 2:
        magic = b"P5"
    elif image.ndim == 3 and image.shape[2] == 3:
        magic = b"P6"
    else:
        raise FormatError(f"unsupported image shape {image.shape}")
    h, w = image.shape[:2]
    header = magic + b"\n%d %d\n255\n" % (w, h)
    atomic_write_bytes(path, header + image.tobytes())


def read_pnm(path: str | Path) -> np.ndarray:
    """Read a binary P5/P6 file into a uint8 array (h, w) or (h, w, 3)."""
    data = Path(path).read_bytes()
    if data[:2] == b"P5":
        channels = 1
    elif data[:2] == b"P6":
        channels = 3
    else:
        raise FormatError(f"{path}: not a binary P5/P6 file")
    fields, pos = _read_header_tokens(data, 2, count=3)
    w, h, maxval = fields
    if maxval != 255:
        raise FormatError(f"{path}: only maxval 255 supported, got {maxval}")
    n = w * h * channels
    pixels = data[pos : pos + n]
    if len(pixels) != n:
        raise FormatError(f"{path}: truncated pixel data")
    arr = np.frombuffer(pixels, dtype=np.uint8)
    if channels == 1:
        return arr.reshape(h, w).copy()
    return arr.reshape(h, w, 3).copy()


def _read_header_tokens(data: bytes, pos: int, count: int) -> tuple[list[int], int]:
    # Whitespace-separated decimal tokens; '#' starts a comment to end of line.
    # Exactly one whitespace byte follows the last token before pixel data.
    tokens: list[int] = []
    while len(tokens) < count:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos] == ord("#"):
            while pos < len(data) and data[pos] != ord("\n"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError("truncated PNM header")
        try:
            tokens.append(int(data[start:pos]))
        except ValueError as exc:
            raise FormatError(f"bad PNM header token {data[start:pos]!r}") from exc
    return tokens, pos + 1


def atomic_write_bytes(path: str | Path, data: bytes) -> None:
    """Write bytes via a temp file in the same directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path: str | Path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))
