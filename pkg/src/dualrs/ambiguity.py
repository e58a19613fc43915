"""Consecutive-frame rolling-shutter ambiguity demo.

A rolling-shutter camera panning horizontally at speed v with per-row
readout tau smears a vertical rod into a slanted one: the rod's column
shifts by v * tau per row (the camera moves right, so content drifts left).
A statically tilted rod produces the same slant with no motion at all.
Matching the slopes

    tan(tilt) = v1 * tau1 - v2 * tau2        (per 1-px row height)

makes the two captures identical, which is why single-direction RS video
cannot distinguish shape from motion. Dual reversed scanning breaks the
tie: the bottom-up capture slants the moving rod the opposite way.

The slope bookkeeping runs in exact rational arithmetic so the matched
pair rasterizes bit-identically; any perturbation of the tilt breaks the
identity visibly.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .camera import CameraConfig, ScanDirection
from .errors import DomainError, UnsatisfiableParametersError
from .imaging import RsImage

#: Half-width in pixels of the rasterized rod's tent profile.
ROD_HALF_WIDTH = 1.5


def solve_matching_tilt(v1: float, tau1: float, v2: float, tau2: float) -> float:
    """Rod tilt in degrees that makes capture (v1, tau1) match (v2, tau2)."""
    return math.degrees(math.atan(v1 * tau1 - v2 * tau2))


def _raster_rod(rows: int, cols: int, x0: Fraction, slope: Fraction) -> np.ndarray:
    """Anti-aliased vertical-ish rod: tent profile around x0 + r * slope."""
    img = np.zeros((rows, cols), dtype=np.float32)
    cols_idx = np.arange(cols, dtype=np.float64)
    for r in range(rows):
        center = float(x0 + r * slope)
        img[r] = np.maximum(0.0, 1.0 - np.abs(cols_idx - center) / ROD_HALF_WIDTH)
    return img


def ambiguity_pair(
    rod_tilt_deg: float | None,
    speeds: tuple[float, float],
    readouts: tuple[float, float],
    rows: int = 64,
    cols: int = 64,
) -> tuple[RsImage, RsImage]:
    """Render the two captures that the consecutive-frame setting confuses.

    The first image is a rod tilted by `rod_tilt_deg` seen by a camera
    panning at speeds[0] with readouts[0]; the second is a perfectly
    vertical rod under (speeds[1], readouts[1]). When `rod_tilt_deg` is
    None the matching tilt is solved so the two rasterize identically.

    Raises UnsatisfiableParametersError when the implied slant drives the
    rod out of the frame before the last row.
    """
    v1, v2 = (float(s) for s in speeds)
    tau1, tau2 = (float(t) for t in readouts)
    if tau1 <= 0 or tau2 <= 0:
        raise DomainError("readout times must be positive")

    # Exact per-row drift of each capture; Fraction(float) is lossless.
    drift1 = Fraction(v1) * Fraction(tau1)
    drift2 = Fraction(v2) * Fraction(tau2)
    if rod_tilt_deg is None:
        tilt_slope = drift1 - drift2
    else:
        tilt_slope = Fraction(math.tan(math.radians(float(rod_tilt_deg))))

    slope_tilted = tilt_slope - drift1
    slope_vertical = -drift2

    x0 = Fraction(cols - 1, 2)
    reach = max(abs(float(slope_tilted)), abs(float(slope_vertical))) * (rows - 1)
    if reach > float(x0) - ROD_HALF_WIDTH - 1:
        raise UnsatisfiableParametersError(
            "rod leaves the frame before the last row; the construction needs "
            "|tan(tilt) - v1*tau1| small enough to stay inside, with "
            "tan(tilt) = v1*tau1 - v2*tau2 for a matching pair"
        )

    cfg1 = CameraConfig(rows=rows, cols=cols, readout=tau1)
    cfg2 = CameraConfig(rows=rows, cols=cols, readout=tau2)
    tilted = _raster_rod(rows, cols, x0, slope_tilted)
    vertical = _raster_rod(rows, cols, x0, slope_vertical)
    return (
        RsImage(tilted, ScanDirection.T2B, cfg1),
        RsImage(vertical, ScanDirection.T2B, cfg2),
    )
