"""Deterministic synthetic textures for simulation and tests.

Smooth band-limited noise is the workhorse: warping error is proportional
to the local gradient, so smooth textures keep interpolation error small
while still carrying enough structure to pin down motion. The windowed
variant fades to a flat mid-gray near the border, which makes
replicate-clamp sampling agree with the (constant) scene beyond the frame
and removes border bias from synthetic experiments.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import gaussian_filter


def checkerboard(rows: int, cols: int, cell: int = 8, channels: int = 1) -> np.ndarray:
    """Binary-ish checkerboard at 0.1/0.9 levels."""
    ys, xs = np.mgrid[0:rows, 0:cols]
    board = ((ys // cell + xs // cell) % 2).astype(np.float32)
    img = 0.1 + 0.8 * board
    return np.repeat(img[..., None], channels, axis=2)


def smooth_noise(
    rows: int,
    cols: int,
    seed: int = 0,
    channels: int = 1,
    smoothness: float = 2.0,
) -> np.ndarray:
    """Gaussian-filtered uniform noise rescaled into [0.1, 0.9]."""
    rng = np.random.default_rng(seed)
    img = np.empty((rows, cols, channels), dtype=np.float32)
    for c in range(channels):
        plane = gaussian_filter(rng.random((rows, cols)), smoothness)
        lo, hi = plane.min(), plane.max()
        img[..., c] = 0.1 + 0.8 * (plane - lo) / max(hi - lo, 1e-12)
    return img


def windowed_noise(
    rows: int,
    cols: int,
    seed: int = 0,
    channels: int = 1,
    smoothness: float = 2.0,
    margin: int = 8,
) -> np.ndarray:
    """Smooth noise fading to flat 0.5 within `margin` px of the border."""
    img = smooth_noise(rows, cols, seed, channels, smoothness)
    ys, xs = np.mgrid[0:rows, 0:cols]
    dist = np.minimum.reduce([ys, xs, rows - 1 - ys, cols - 1 - xs]).astype(np.float64)
    ramp = np.clip(dist / max(margin, 1), 0.0, 1.0)
    window = (0.5 - 0.5 * np.cos(np.pi * ramp))[..., None]
    return (0.5 + (img - 0.5) * window).astype(np.float32)
