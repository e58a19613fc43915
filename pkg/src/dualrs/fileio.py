"""File formats: PFM float images, Middlebury .flo flows, PNG previews.

PFM is the authoritative float format (write -> read round-trips
bit-exactly); PNG is an 8-bit preview only. Layouts:

* PFM: header "PF\\n" (color) or "Pf\\n" (grayscale), "{w} {h}\\n",
  "-1.0\\n" (negative scale = little-endian), then float32 rows stored
  bottom-to-top.
* .flo: 4 magic bytes "PIEH", little-endian int32 width and height, then
  row-major interleaved float32 (u, v) pairs.

Malformed files raise FormatError naming the byte offset of the problem.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .errors import DomainError, FormatError, ShapeError
from .warp import FlowField

FLO_MAGIC = b"PIEH"


def write_pfm(path: str | Path, image: np.ndarray) -> None:
    """Write a float32 image as PFM (grayscale Pf or 3-channel PF)."""
    arr = np.asarray(image, dtype=np.float32)
    if arr.ndim == 2:
        arr = arr[..., None]
    if arr.ndim != 3 or arr.shape[2] not in (1, 3):
        raise ShapeError(f"PFM supports 1 or 3 channels, got shape {arr.shape}")
    header = b"Pf\n" if arr.shape[2] == 1 else b"PF\n"
    h, w = arr.shape[:2]
    payload = np.ascontiguousarray(np.flipud(arr)).astype("<f4")
    with open(path, "wb") as f:
        f.write(header)
        f.write(f"{w} {h}\n".encode("ascii"))
        f.write(b"-1.0\n")
        f.write(payload.tobytes())


def read_pfm(path: str | Path) -> np.ndarray:
    """Read a PFM image back as float32 (H, W, C)."""
    data = Path(path).read_bytes()

    def token(start: int) -> tuple[bytes, int]:
        while start < len(data) and data[start : start + 1].isspace():
            start += 1
        end = start
        while end < len(data) and not data[end : end + 1].isspace():
            end += 1
        if start == end:
            raise FormatError(f"{path}: truncated header at byte {start}")
        return data[start:end], end + 1

    magic, pos = token(0)
    if magic == b"PF":
        channels = 3
    elif magic == b"Pf":
        channels = 1
    else:
        raise FormatError(f"{path}: bad magic {magic!r} at byte 0")
    wtok, pos = token(pos)
    htok, pos = token(pos)
    stok, pos = token(pos)
    try:
        w, h, scale = int(wtok), int(htok), float(stok)
    except ValueError:
        raise FormatError(f"{path}: malformed header near byte {pos}") from None
    endian = "<" if scale < 0 else ">"
    count = w * h * channels
    need = count * 4
    if len(data) - pos < need:
        raise FormatError(
            f"{path}: payload truncated at byte {len(data)} (need {pos + need})"
        )
    flat = np.frombuffer(data, dtype=f"{endian}f4", count=count, offset=pos)
    img = flat.reshape(h, w, channels)
    return np.flipud(img).astype(np.float32)


def write_flo(path: str | Path, flow: FlowField) -> None:
    """Write a flow field in Middlebury .flo layout."""
    h, w = flow.shape
    with open(path, "wb") as f:
        f.write(FLO_MAGIC)
        f.write(np.array([w, h], dtype="<i4").tobytes())
        f.write(np.ascontiguousarray(flow.as_array()).astype("<f4").tobytes())


def read_flo(path: str | Path) -> FlowField:
    """Read a Middlebury .flo flow field."""
    data = Path(path).read_bytes()
    if len(data) < 12:
        raise FormatError(f"{path}: header truncated at byte {len(data)}")
    if data[:4] != FLO_MAGIC:
        raise FormatError(f"{path}: bad magic {data[:4]!r} at byte 0")
    w, h = np.frombuffer(data, dtype="<i4", count=2, offset=4)
    if w <= 0 or h <= 0:
        raise FormatError(f"{path}: bad dimensions {w}x{h} at byte 4")
    need = 12 + int(w) * int(h) * 2 * 4
    if len(data) < need:
        raise FormatError(f"{path}: payload truncated at byte {len(data)} (need {need})")
    arr = np.frombuffer(data, dtype="<f4", count=int(w) * int(h) * 2, offset=12)
    arr = arr.reshape(int(h), int(w), 2)
    return FlowField.from_array(arr.astype(np.float32))


def write_png(path: str | Path, image: np.ndarray) -> None:
    """8-bit preview with round-to-nearest quantization of [0, 1] values."""
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[..., None]
    if arr.ndim != 3 or arr.shape[2] not in (1, 3):
        raise ShapeError(f"PNG preview supports 1 or 3 channels, got {arr.shape}")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise DomainError("PNG preview expects values in [0, 1]")
    quantized = np.round(arr * 255.0).astype(np.uint8)
    if quantized.shape[2] == 1:
        Image.fromarray(quantized[..., 0], mode="L").save(path)
    else:
        Image.fromarray(quantized, mode="RGB").save(path)


def read_png(path: str | Path) -> np.ndarray:
    """Read an 8-bit PNG back into float32 [0, 1] with shape (H, W, C)."""
    with Image.open(path) as im:
        arr = np.asarray(im)
    if arr.ndim == 2:
        arr = arr[..., None]
    return (arr.astype(np.float32) / 255.0).astype(np.float32)
