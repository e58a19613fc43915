"""Optional numba kernels for the two sampling hot loops.

Both kernels mirror the numpy reference paths in warp.py operation for
operation, so results are bit-identical whichever path runs:

* splat accumulation receives precomputed targets and Gaussian weights and
  only performs the serial row-major accumulation (the same source order
  numpy's bincount uses).
* the backwarp gather evaluates the identical clamp/floor/lerp expression
  per pixel.

When numba is unavailable the library silently uses the numpy paths; this
module then only exports HAVE_NUMBA = False.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

if HAVE_NUMBA:

    @njit(cache=True)
    def splat_accumulate(tx, ty, weight, values, acc, wsum):
        h, w = tx.shape
        k = values.shape[2]
        for y in range(h):
            for x in range(w):
                cx = tx[y, x]
                cy = ty[y, x]
                if 0 <= cx < w and 0 <= cy < h:
                    wt = weight[y, x]
                    wsum[cy, cx] += wt
                    for c in range(k):
                        acc[cy, cx, c] += wt * values[y, x, c]

    @njit(cache=True)
    def backwarp_gather(img, u, v, out):
        h, w, ch = img.shape
        for y in range(h):
            for x in range(w):
                px = x + u[y, x]
                if px < 0.0:
                    px = 0.0
                elif px > w - 1.0:
                    px = w - 1.0
                py = y + v[y, x]
                if py < 0.0:
                    py = 0.0
                elif py > h - 1.0:
                    py = h - 1.0
                x0 = int(np.floor(px))
                y0 = int(np.floor(py))
                fx = px - x0
                fy = py - y0
                x1 = x0 + 1 if x0 + 1 <= w - 1 else w - 1
                y1 = y0 + 1 if y0 + 1 <= h - 1 else h - 1
                for c in range(ch):
                    top = img[y0, x0, c] * (1.0 - fx) + img[y0, x1, c] * fx
                    bot = img[y1, x0, c] * (1.0 - fx) + img[y1, x1, c] * fx
                    out[y, x, c] = top * (1.0 - fy) + bot * fy

    def warmup() -> None:
        """Trigger JIT compilation on tiny inputs (cached across runs)."""
        tx = np.zeros((2, 2), dtype=np.int64)
        ty = np.zeros((2, 2), dtype=np.int64)
        wt = np.ones((2, 2), dtype=np.float64)
        vals = np.ones((2, 2, 2), dtype=np.float64)
        splat_accumulate(tx, ty, wt, vals, np.zeros((2, 2, 2)), np.zeros((2, 2)))
        img = np.zeros((2, 2, 1), dtype=np.float64)
        flow = np.zeros((2, 2), dtype=np.float32)
        backwarp_gather(img, flow, flow, np.zeros((2, 2, 1), dtype=np.float32))

else:

    def warmup() -> None:
        pass
