"""Sampling primitives: bilinear backwarping and Gaussian forward splatting.

Both operations are pure and deterministic. Splat accumulation runs in
float64 with a fixed row-major source order, so identical inputs give
bit-identical outputs regardless of platform; flow fields themselves are
stored as float32.

Coordinate convention: `u` displaces along columns (x), `v` along rows (y).
Backwarping samples the source image at `x + flow(x)` with replicate-clamp
borders. Forward splatting sends each source pixel to the single target
obtained by rounding `y + carrier(y)` half away from zero (platform-stable,
unlike round-half-even).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DomainError, ShapeError

#: Default Gaussian splat width in pixels.
DEFAULT_SPLAT_SIGMA = 1.0


@dataclass
class FlowField:
    """Dense pixel displacement field.

    Attributes:
        u: (H, W) float32 displacement along columns.
        v: (H, W) float32 displacement along rows.
        hole_mask: optional (H, W) bool map, True where no splat reached
            the pixel (zero accumulated weight) and the value is a fallback.
    """

    u: np.ndarray
    v: np.ndarray
    hole_mask: np.ndarray | None = None

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=np.float32)
        self.v = np.asarray(self.v, dtype=np.float32)
        if self.u.ndim != 2 or self.u.shape != self.v.shape:
            raise ShapeError(
                f"flow components must be matching 2-D maps, got {self.u.shape} and {self.v.shape}"
            )
        if not (np.isfinite(self.u).all() and np.isfinite(self.v).all()):
            raise DomainError("flow field contains non-finite values")
        if self.hole_mask is not None:
            self.hole_mask = np.asarray(self.hole_mask, dtype=bool)
            if self.hole_mask.shape != self.u.shape:
                raise ShapeError("hole_mask shape differs from flow shape")

    @property
    def shape(self) -> tuple[int, int]:
        return self.u.shape

    def as_array(self) -> np.ndarray:
        """Stack components into (H, W, 2) with u first."""
        return np.stack([self.u, self.v], axis=-1)

    @classmethod
    def from_array(cls, arr: np.ndarray, hole_mask: np.ndarray | None = None) -> "FlowField":
        arr = np.asarray(arr)
        if arr.ndim != 3 or arr.shape[2] != 2:
            raise ShapeError(f"expected (H, W, 2) flow array, got {arr.shape}")
        return cls(arr[..., 0], arr[..., 1], hole_mask)

    @classmethod
    def constant(cls, rows: int, cols: int, u: float, v: float) -> "FlowField":
        return cls(np.full((rows, cols), u, np.float32), np.full((rows, cols), v, np.float32))

    @classmethod
    def zero(cls, rows: int, cols: int) -> "FlowField":
        return cls.constant(rows, cols, 0.0, 0.0)

    def scaled(self, factor: float) -> "FlowField":
        return FlowField(self.u * np.float32(factor), self.v * np.float32(factor))

    def negated(self) -> "FlowField":
        return FlowField(-self.u, -self.v)


def round_half_away(x: np.ndarray) -> np.ndarray:
    """Round to nearest integer with halves away from zero.

    numpy's own rounding is half-to-even; splat target selection must not
    depend on that tie rule, so the rounding is pinned here.
    """
    x = np.asarray(x)
    return np.copysign(np.floor(np.abs(x) + 0.5), x)


_GRID_CACHE: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}


def _pixel_grid(h: int, w: int) -> tuple[np.ndarray, np.ndarray]:
    """Cached (ys, xs) float64 coordinate grids (read-only)."""
    key = (h, w)
    grids = _GRID_CACHE.get(key)
    if grids is None:
        ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
        ys.setflags(write=False)
        xs.setflags(write=False)
        if len(_GRID_CACHE) > 32:
            _GRID_CACHE.clear()
        grids = _GRID_CACHE[key] = (ys, xs)
    return grids


def _as_image(image: np.ndarray) -> np.ndarray:
    image = np.asarray(image)
    if image.ndim == 2:
        image = image[..., None]
    if image.ndim != 3:
        raise ShapeError(f"expected (H, W) or (H, W, C) image, got shape {image.shape}")
    return image


def backwarp(image: np.ndarray, flow: FlowField | np.ndarray) -> np.ndarray:
    """Sample `image` at positions displaced by `flow`.

    output(x) = bilinear(image, x + flow(x)), with sampling coordinates
    replicate-clamped to the image rectangle. Interpolation runs in float64
    and the result is returned as float32 with the input's channel layout.
    """
    squeeze = np.asarray(image).ndim == 2
    img = _as_image(image).astype(np.float64, copy=False)
    if not isinstance(flow, FlowField):
        flow = FlowField.from_array(np.asarray(flow))
    h, w = img.shape[:2]
    if flow.shape != (h, w):
        raise ShapeError(f"flow shape {flow.shape} does not match image {(h, w)}")

    if _kernels.HAVE_NUMBA:
        out = np.empty(img.shape, dtype=np.float32)
        _kernels.backwarp_gather(
            np.ascontiguousarray(img),
            np.ascontiguousarray(flow.u),
            np.ascontiguousarray(flow.v),
            out,
        )
        return out[..., 0] if squeeze else out

    ys, xs = _pixel_grid(h, w)
    px = np.clip(xs + flow.u, 0.0, w - 1.0)
    py = np.clip(ys + flow.v, 0.0, h - 1.0)

    x0 = np.floor(px).astype(np.intp)
    y0 = np.floor(py).astype(np.intp)
    fx = (px - x0)[..., None]
    fy = (py - y0)[..., None]
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)

    flat = img.reshape(-1, img.shape[2])
    row0 = y0 * w
    row1 = y1 * w
    top = flat[row0 + x0] * (1.0 - fx) + flat[row0 + x1] * fx
    bottom = flat[row1 + x0] * (1.0 - fx) + flat[row1 + x1] * fx
    out = (top * (1.0 - fy) + bottom * fy).astype(np.float32)
    return out[..., 0] if squeeze else out


def forward_splat(
    values: np.ndarray,
    carrier: FlowField,
    sigma: float = DEFAULT_SPLAT_SIGMA,
) -> tuple[np.ndarray, np.ndarray]:
    """Splat per-pixel 2-vectors along a carrier flow with Gaussian weights.

    Each source pixel y lands on the single target x* = round(y + carrier(y))
    (half away from zero). In-bounds targets accumulate w * values(y) and w,
    with w = exp(-d^2 / (2 sigma^2)) and d the distance between x* and the
    continuous arrival point y + carrier(y).

    `values` is (H, W, 2) for flow vectors; extra trailing channels are
    accumulated the same way.

    Returns:
        (accumulated, weight_sum): float64 arrays of shape (H, W, K) and
        (H, W). Targets with weight_sum == 0 received no splat (holes).
    """
    if not sigma > 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    values = np.asarray(values, dtype=np.float64)
    h, w = carrier.shape
    if values.ndim != 3 or values.shape[:2] != (h, w):
        raise ShapeError(f"expected values shaped ({h}, {w}, K), got {values.shape}")
    return _splat_core(carrier.u, carrier.v, values, sigma)


def _splat_core(
    carrier_u: np.ndarray,
    carrier_v: np.ndarray,
    values: np.ndarray,
    sigma: float,
) -> tuple[np.ndarray, np.ndarray]:
    """forward_splat without the FlowField wrapper (carriers are float32)."""
    h, w = carrier_u.shape
    ys, xs = _pixel_grid(h, w)
    ax = xs + carrier_u
    ay = ys + carrier_v
    tx = round_half_away(ax)
    ty = round_half_away(ay)

    d2 = (tx - ax) ** 2 + (ty - ay) ** 2
    weight = np.exp(-d2 / (2.0 * sigma * sigma))

    if _kernels.HAVE_NUMBA:
        accumulated = np.zeros((h, w, values.shape[2]), dtype=np.float64)
        weight_sum = np.zeros((h, w), dtype=np.float64)
        _kernels.splat_accumulate(
            tx.astype(np.int64),
            ty.astype(np.int64),
            weight,
            np.ascontiguousarray(values),
            accumulated,
            weight_sum,
        )
        return accumulated, weight_sum

    inb = (tx >= 0) & (tx <= w - 1) & (ty >= 0) & (ty <= h - 1)
    idx = (ty[inb].astype(np.intp) * w + tx[inb].astype(np.intp)).ravel()
    wsel = weight[inb].ravel()
    n = h * w
    weight_sum = np.bincount(idx, weights=wsel, minlength=n).reshape(h, w)
    accumulated = np.empty((h, w, values.shape[2]), dtype=np.float64)
    for c in range(values.shape[2]):
        accumulated[..., c] = np.bincount(
            idx, weights=wsel * values[..., c][inb].ravel(), minlength=n
        ).reshape(h, w)
    return accumulated, weight_sum
