"""Forward simulation of dual reversed rolling-shutter capture.

Two capture paths are provided:

* capture_dual_rs takes a stack of H global-shutter frames, one per readout
  instant, and copies the row each scan direction exposes at that instant.
  No temporal interpolation happens; the frame count must be exactly H.
* render_rs_analytic evaluates a continuous motion model at each row's
  readout fraction and bilinearly samples a single base frame. It is the
  brute-force oracle the reconstruction tests compare against.

Both store rolling-shutter images in physical row coordinates: row r of
either output is the scene's row r, whichever instant exposed it. A static
scene therefore yields pixel-identical dual images.

A positive motion model displacement moves scene content in +x/+y as time
advances, so renders sample the base frame upstream (at x - s * V).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .camera import CameraConfig, ScanDirection
from .errors import DomainError, ShapeError, TimingError
from .motion import MotionModel, evaluate_motion
from .warp import backwarp

#: Relative timestamp slack (fraction of the readout interval) tolerated
#: before frame-stack capture refuses the sequence.
TIMESTAMP_TOLERANCE = 0.01


def as_image(pixels: np.ndarray, *, check_range: bool = True) -> np.ndarray:
    """Coerce to a float32 (H, W, C) image and validate the [0, 1] range."""
    arr = np.asarray(pixels)
    if arr.ndim == 2:
        arr = arr[..., None]
    if arr.ndim != 3:
        raise ShapeError(f"expected (H, W) or (H, W, C) image, got {arr.shape}")
    arr = arr.astype(np.float32, copy=False)
    if check_range and (arr.min() < 0.0 or arr.max() > 1.0):
        raise DomainError("image values must lie in [0, 1]")
    return arr


@dataclass
class GsSequence:
    """Ordered global-shutter frames with strictly increasing timestamps."""

    frames: list[np.ndarray]
    timestamps: np.ndarray

    def __post_init__(self):
        if not self.frames:
            raise ShapeError("GsSequence needs at least one frame")
        self.frames = [as_image(f) for f in self.frames]
        shape = self.frames[0].shape
        for i, f in enumerate(self.frames):
            if f.shape != shape:
                raise ShapeError(f"frame {i} has shape {f.shape}, expected {shape}")
        self.timestamps = np.asarray(self.timestamps, dtype=np.float64).reshape(-1)
        if len(self.timestamps) != len(self.frames):
            raise ShapeError("one timestamp per frame required")
        if len(self.timestamps) > 1 and not np.all(np.diff(self.timestamps) > 0):
            raise DomainError("timestamps must be strictly increasing")

    def __len__(self) -> int:
        return len(self.frames)


@dataclass
class RsImage:
    """A rolling-shutter image tagged with scan direction and camera timing.

    Stored in physical row coordinates. `hole_mask`, when present, marks
    pixels whose reconstruction relied on hole-filled flow; capture and
    render paths leave it None.
    """

    pixels: np.ndarray
    direction: ScanDirection
    config: CameraConfig
    hole_mask: np.ndarray | None = field(default=None)

    def __post_init__(self):
        self.pixels = as_image(self.pixels)
        self.direction = ScanDirection.parse(self.direction)
        h, w = self.pixels.shape[:2]
        if (h, w) != (self.config.rows, self.config.cols):
            raise ShapeError(
                f"pixels are {h}x{w} but camera is {self.config.rows}x{self.config.cols}"
            )
        if self.hole_mask is not None:
            self.hole_mask = np.asarray(self.hole_mask, dtype=bool)
            if self.hole_mask.shape != (h, w):
                raise ShapeError("hole_mask shape differs from image shape")

    @property
    def shape(self) -> tuple[int, ...]:
        return self.pixels.shape


def time_displacement(
    config: CameraConfig, m: int, direction: ScanDirection | str
) -> np.ndarray:
    """Per-row signed time offset between GS instant m and each RS row.

    Row i of the returned map is the offset, in fractions of the full
    readout span, between the instant physical row i was exposed and the
    target instant t_m:

        t2b: (i - m) / (H - 1)
        b2t: ((H - i) - (m - 1)) / (H - 1)

    Values lie in [-1, 1]; the row exposed exactly at t_m maps to 0.
    """
    h = config.rows
    config._check_row(m)
    i = np.arange(1, h + 1, dtype=np.float64)
    if ScanDirection.parse(direction) is ScanDirection.T2B:
        return (i - m) / (h - 1)
    return ((h - i) - (m - 1)) / (h - 1)


def capture_dual_rs(seq: GsSequence, config: CameraConfig) -> tuple[RsImage, RsImage]:
    """Expose dual reversed RS images from a stack of H per-instant frames.

    Frame i (1-based) must be the scene at readout instant i, timestamped
    t + tau * (i - (H + 1) / 2). The t2b image copies row i of frame i; the
    b2t image copies row H - i + 1 of frame i. Outputs are stored in
    physical row coordinates.
    """
    h = config.rows
    if len(seq) != h:
        raise ShapeError(f"frame-stack capture needs exactly {h} frames, got {len(seq)}")
    frame_h, frame_w = seq.frames[0].shape[:2]
    if (frame_h, frame_w) != (h, config.cols):
        raise ShapeError(
            f"frames are {frame_h}x{frame_w} but camera is {h}x{config.cols}"
        )
    expected = config.row_times()
    slack = TIMESTAMP_TOLERANCE * config.readout
    worst = np.max(np.abs(seq.timestamps - expected))
    if worst > slack:
        raise TimingError(
            f"timestamps deviate from the readout schedule by {worst:g}s "
            f"(allowed {slack:g}s)"
        )

    t2b = np.empty_like(seq.frames[0])
    b2t = np.empty_like(seq.frames[0])
    for i in range(1, h + 1):
        t2b[i - 1] = seq.frames[i - 1][i - 1]
        b2t[h - i] = seq.frames[i - 1][h - i]
    return (
        RsImage(t2b, ScanDirection.T2B, config),
        RsImage(b2t, ScanDirection.B2T, config),
    )


def render_gs_at(base: np.ndarray, model: MotionModel, fraction: float) -> np.ndarray:
    """Global-shutter view of `base` after motion up to `fraction` of the span."""
    img = as_image(base)
    h, w = img.shape[:2]
    vel = evaluate_motion(model, w, h)
    sampled = backwarp(img, vel.scaled(-float(fraction)))
    return np.clip(sampled, 0.0, 1.0)


def render_rs_analytic(
    base: np.ndarray,
    model: MotionModel,
    config: CameraConfig,
    direction: ScanDirection | str,
) -> RsImage:
    """Brute-force RS render: each row sampled at its own readout fraction.

    Physical row r is bilinearly sampled from `base` displaced upstream by
    V(x, s_r), where s_r is the row's normalized readout fraction for the
    given direction. Border policy is replicate-clamp; the result is
    clamped to [0, 1]. Deliberately row-by-row so it can serve as the
    independent oracle for the reconstruction pipeline.
    """
    img = as_image(base)
    h, w = img.shape[:2]
    if (h, w) != (config.rows, config.cols):
        raise ShapeError(f"base is {h}x{w} but camera is {config.rows}x{config.cols}")
    direction = ScanDirection.parse(direction)
    vel = evaluate_motion(model, w, h)
    fractions = config.scan_fractions(direction)

    out = np.empty_like(img)
    for r in range(h):
        shifted = backwarp(img, vel.scaled(-float(fractions[r])))
        out[r] = shifted[r]
    return RsImage(np.clip(out, 0.0, 1.0), direction, config)


def gs_frame_stack(base: np.ndarray, model: MotionModel, config: CameraConfig) -> GsSequence:
    """Render the H per-instant GS frames of `base` moving under `model`."""
    img = as_image(base)
    if img.shape[:2] != (config.rows, config.cols):
        raise ShapeError(
            f"base is {img.shape[0]}x{img.shape[1]} but camera is "
            f"{config.rows}x{config.cols}"
        )
    fractions = np.arange(config.rows, dtype=np.float64) / (config.rows - 1)
    frames = [render_gs_at(img, model, s) for s in fractions]
    return GsSequence(frames, config.row_times())
