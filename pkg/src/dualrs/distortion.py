"""Bidirectional distortion warping: rebuild RS images from GS frames.

Given two GS frames bracketing the readout span and the dense flows
between them, each RS row must be re-synthesized at its own readout
fraction. The machinery:

1. A distortion time map T assigns every row its interpolation fraction
   along the bracketing pair (rows, not a single scalar as in ordinary
   frame interpolation).
2. Time-scaled anchor flows and oppositely scaled complementary flows are
   forward-splatted to the RS pixel grid and combined into flows anchored
   at RS pixels (complementary flow reversal). Pixels no source reaches
   are holes, filled with the constant-motion fallback -T * flow, which is
   exact whenever the flow is spatially constant.
3. The RS image is blended from backwarps of both GS frames, weighted by
   the time maps.

For the intermediate-frame variant the span is split at row m: rows up to
m are rebuilt from the (start, mid) pair, the rest from (mid, end), and a
hard per-row mask stitches the halves.

Everything is written for the top-to-bottom scan; bottom-to-top reuses it
with row-reversed time maps and masks (images are stored in physical row
coordinates, so only the timing flips).
"""

from __future__ import annotations

import numpy as np

from .camera import CameraConfig, ScanDirection
from .errors import (
    DegenerateGeometryError,
    DegenerateSegmentError,
    DomainError,
    ShapeError,
)
from .imaging import RsImage, as_image
from .warp import DEFAULT_SPLAT_SIGMA, FlowField, _splat_core, backwarp

#: Accumulated splat weight below which a target pixel counts as a hole.
HOLE_DENOMINATOR_EPS = 1e-12

S2E = "s2e"
E2S = "e2s"
S2M = "s2m"
M2E = "m2e"


def distortion_time_map(rows: int, kind: str, m: int | None = None) -> np.ndarray:
    """Per-row interpolation fraction for a readout span or half-span.

    Kinds (i is the 1-based row index):
        s2e: (i - 1) / (H - 1), the full span start-to-end.
        e2s: complement 1 - s2e.
        s2m: (i - 1) / (m - 1) up to row m, then 1. For m = 1 the first
            segment collapses and the map is 0 at row 1 (limit value).
        m2e: 0 up to row m, then (i - m - 1) / (H - m - 1). For m = H - 1
            the single remaining row takes the limit value 1; m = H leaves
            no rows past the split and is rejected.
    """
    if rows < 2:
        raise DegenerateGeometryError(f"need at least 2 rows, got {rows}")
    i = np.arange(1, rows + 1, dtype=np.float64)
    if kind == S2E:
        return (i - 1) / (rows - 1)
    if kind == E2S:
        return 1.0 - (i - 1) / (rows - 1)
    if kind not in (S2M, M2E):
        raise DomainError(f"unknown time map kind {kind!r}")
    if m is None:
        raise DomainError(f"kind {kind!r} requires a split row m")
    if not 1 <= m <= rows:
        raise DomainError(f"split row {m} outside [1..{rows}]")

    if kind == S2M:
        if m == 1:
            t = np.ones(rows)
            t[0] = 0.0
            return t
        t = np.minimum((i - 1) / (m - 1), 1.0)
        t[i > m] = 1.0
        return t

    # m2e
    if m == rows:
        raise DegenerateGeometryError(
            f"m2e time map undefined for m = H = {m}: no rows past the split"
        )
    t = np.zeros(rows)
    if m == rows - 1:
        t[-1] = 1.0
        return t
    tail = i > m
    t[tail] = (i[tail] - m - 1) / (rows - m - 1)
    return t


def time_mask(rows: int, m: int, direction: ScanDirection | str) -> np.ndarray:
    """Hard per-row partition: 1 where the first segment owns the row.

    t2b: rows i <= m; b2t: row-reversed (the bottom rows are scanned
    first, so they belong to the earlier segment).
    """
    if not 1 <= m <= rows:
        raise DomainError(f"split row {m} outside [1..{rows}]")
    i = np.arange(1, rows + 1)
    mask = (i <= m).astype(np.float64)
    if ScanDirection.parse(direction) is ScanDirection.B2T:
        mask = mask[::-1].copy()
    return mask


def anchor_and_complementary_flows(
    flow_fwd: FlowField,
    flow_bwd: FlowField,
    time_map: np.ndarray,
) -> tuple[FlowField, FlowField, FlowField, FlowField]:
    """Row-scale the GS-pair flows by the time map and its complement.

    Returns (anchor_fwd, anchor_bwd, compl_fwd, compl_bwd):
        anchor_fwd = T * flow_fwd       anchor_bwd = (1 - T) * flow_bwd
        compl_fwd  = (1 - T) * flow_fwd compl_bwd  = T * flow_bwd
    """
    h, w = flow_fwd.shape
    if flow_bwd.shape != (h, w):
        raise ShapeError("forward/backward flows disagree in shape")
    t = np.asarray(time_map, dtype=np.float64).reshape(-1)
    if t.shape[0] != h:
        raise ShapeError(f"time map has {t.shape[0]} rows, flows have {h}")
    t = t[:, None]
    tc = 1.0 - t
    anchor_fwd = FlowField(t * flow_fwd.u, t * flow_fwd.v)
    anchor_bwd = FlowField(tc * flow_bwd.u, tc * flow_bwd.v)
    compl_fwd = FlowField(tc * flow_fwd.u, tc * flow_fwd.v)
    compl_bwd = FlowField(t * flow_bwd.u, t * flow_bwd.v)
    return anchor_fwd, anchor_bwd, compl_fwd, compl_bwd


def cfr_reverse(
    flow_fwd: FlowField,
    flow_bwd: FlowField,
    time_map: np.ndarray,
    sigma: float = DEFAULT_SPLAT_SIGMA,
) -> tuple[FlowField, FlowField]:
    """Reverse GS-pair flows onto the RS pixel grid (complementary reversal).

    Anchor flows carry both their own values and the complementary values
    to the rounded targets; the two neighborhoods are combined per target
    pixel x as

        rev_fwd(x) = (T(x) * S2[compl_bwd] - (1-T)(x) * S1[anchor_fwd]) / den
        rev_bwd(x) = ((1-T)(x) * S1[compl_fwd] - T(x) * S2[anchor_bwd]) / den
        den        = (1-T)(x) * S1[w] + T(x) * S2[w]

    where S1/S2 are Gaussian-weighted splat sums along the forward/backward
    anchors. Targets with den below HOLE_DENOMINATOR_EPS are holes; they
    are filled with -T * flow_fwd and -(1-T) * flow_bwd (the exact result
    for spatially constant flow) and flagged in the shared hole mask.
    """
    h, w = flow_fwd.shape
    if flow_bwd.shape != (h, w):
        raise ShapeError("forward/backward flows disagree in shape")
    t = np.asarray(time_map, dtype=np.float64).reshape(-1)
    if t.shape[0] != h:
        raise ShapeError(f"time map has {t.shape[0]} rows, flows have {h}")
    t2 = t[:, None]
    tc2 = 1.0 - t2
    t3 = t2[..., None]
    tc3 = tc2[..., None]

    fwd = flow_fwd.as_array().astype(np.float64)
    bwd = flow_bwd.as_array().astype(np.float64)
    anchor_fwd = t3 * fwd  # F1 along start->end, also the N1 carrier
    anchor_bwd = tc3 * bwd  # F1 along end->start, also the N2 carrier

    # One splat pass per neighborhood carries both the anchor and the
    # complementary values (channels 0:2 and 2:4). Carriers are cast to
    # float32 to match the FlowField contract of forward_splat.
    values1 = np.concatenate([anchor_fwd, tc3 * fwd], axis=2)
    values2 = np.concatenate([t3 * bwd, anchor_bwd], axis=2)
    sums1, wsum1 = _splat_core(
        anchor_fwd[..., 0].astype(np.float32),
        anchor_fwd[..., 1].astype(np.float32),
        values1,
        sigma,
    )
    sums2, wsum2 = _splat_core(
        anchor_bwd[..., 0].astype(np.float32),
        anchor_bwd[..., 1].astype(np.float32),
        values2,
        sigma,
    )

    den = tc2 * wsum1 + t2 * wsum2
    hole = den < HOLE_DENOMINATOR_EPS
    safe = np.where(hole, 1.0, den)[..., None]

    rev_fwd = (t3 * sums2[..., 0:2] - tc3 * sums1[..., 0:2]) / safe
    rev_bwd = (tc3 * sums1[..., 2:4] - t3 * sums2[..., 2:4]) / safe

    hole3 = hole[..., None]
    rev_fwd = np.where(hole3, -t3 * fwd, rev_fwd)
    rev_bwd = np.where(hole3, -tc3 * bwd, rev_bwd)

    out_fwd = FlowField(rev_fwd[..., 0], rev_fwd[..., 1], hole)
    out_bwd = FlowField(rev_bwd[..., 0], rev_bwd[..., 1], hole.copy())
    return out_fwd, out_bwd


def _blend_segment(
    gs_a: np.ndarray,
    gs_b: np.ndarray,
    flow_fwd: FlowField,
    flow_bwd: FlowField,
    time_map: np.ndarray,
    sigma: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Backwarp both segment endpoints and blend them by the time map."""
    rev_fwd, rev_bwd = cfr_reverse(flow_fwd, flow_bwd, time_map, sigma)
    from_a = backwarp(gs_a, rev_fwd)
    from_b = backwarp(gs_b, rev_bwd)
    t = np.asarray(time_map, dtype=np.float64).reshape(-1, 1, 1)
    blended = (1.0 - t) * from_a + t * from_b
    return blended.astype(np.float32), rev_fwd.hole_mask


def _nominal_config(h: int, w: int, config: CameraConfig | None) -> CameraConfig:
    if config is None:
        return CameraConfig(rows=h, cols=w)
    if (config.rows, config.cols) != (h, w):
        raise ShapeError(
            f"camera is {config.rows}x{config.cols} but frames are {h}x{w}"
        )
    return config


def reconstruct_rs_endpoints(
    gs_start: np.ndarray,
    gs_end: np.ndarray,
    flow_fwd: FlowField,
    flow_bwd: FlowField,
    direction: ScanDirection | str,
    sigma: float = DEFAULT_SPLAT_SIGMA,
    config: CameraConfig | None = None,
) -> RsImage:
    """Rebuild an RS image from the two GS frames bracketing its readout.

    `flow_fwd`/`flow_bwd` are the dense flows start->end and end->start
    between the GS frames. The hole mask of the reversed flows is carried
    on the returned image.
    """
    start = as_image(gs_start)
    end = as_image(gs_end)
    if start.shape != end.shape:
        raise ShapeError("GS endpoint frames disagree in shape")
    h, w = start.shape[:2]
    if flow_fwd.shape != (h, w):
        raise ShapeError("flow shape does not match the GS frames")
    direction = ScanDirection.parse(direction)

    tmap = distortion_time_map(h, S2E)
    if direction is ScanDirection.B2T:
        tmap = tmap[::-1].copy()
    blended, hole = _blend_segment(start, end, flow_fwd, flow_bwd, tmap, sigma)
    return RsImage(
        np.clip(blended, 0.0, 1.0),
        direction,
        _nominal_config(h, w, config),
        hole_mask=hole,
    )


def reconstruct_rs_intermediate(
    gs_start: np.ndarray,
    gs_mid: np.ndarray,
    gs_end: np.ndarray,
    flows_start_mid: tuple[FlowField, FlowField],
    flows_mid_end: tuple[FlowField, FlowField],
    m: int,
    direction: ScanDirection | str,
    sigma: float = DEFAULT_SPLAT_SIGMA,
    config: CameraConfig | None = None,
) -> RsImage:
    """Rebuild an RS image routing rows through an intermediate GS frame.

    Rows scanned up to instant m come from the (start, mid) pair with the
    s2m time map; later rows come from (mid, end) with the m2e map; a hard
    row mask stitches the two. Degenerate splits (m = 1, H-1, H) collapse
    the empty segment and route every row through the other one.
    """
    start = as_image(gs_start)
    mid = as_image(gs_mid)
    end = as_image(gs_end)
    if not (start.shape == mid.shape == end.shape):
        raise ShapeError("GS triplet frames disagree in shape")
    h, w = start.shape[:2]
    if not 1 <= m <= h:
        raise DegenerateSegmentError(f"split row {m} outside [1..{h}]")
    direction = ScanDirection.parse(direction)

    t_sm = distortion_time_map(h, S2M, m)
    t_me = distortion_time_map(h, M2E, m) if m < h else np.zeros(h)
    mask = time_mask(h, m, direction)
    if direction is ScanDirection.B2T:
        t_sm = t_sm[::-1].copy()
        t_me = t_me[::-1].copy()

    img_sm, hole_sm = _blend_segment(
        start, mid, flows_start_mid[0], flows_start_mid[1], t_sm, sigma
    )
    if m == h:
        img_me, hole_me = img_sm, hole_sm
    else:
        img_me, hole_me = _blend_segment(
            mid, end, flows_mid_end[0], flows_mid_end[1], t_me, sigma
        )

    sel = mask[:, None, None]
    pixels = sel * img_sm.astype(np.float64) + (1.0 - sel) * img_me.astype(np.float64)
    hole = np.where(mask[:, None].astype(bool), hole_sm, hole_me)
    return RsImage(
        np.clip(pixels, 0.0, 1.0).astype(np.float32),
        direction,
        _nominal_config(h, w, config),
        hole_mask=hole,
    )
