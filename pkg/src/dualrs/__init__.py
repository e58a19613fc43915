"""Dual reversed rolling-shutter simulation, reconstruction, and correction.

The package simulates dual RS capture from global-shutter content, rebuilds
RS images from GS frames by bidirectional distortion warping, and corrects
RS distortion by fitting a parametric motion model against a
self-supervised cycle-consistency objective. No learned components.
"""

from .ambiguity import ambiguity_pair, solve_matching_tilt
from .camera import CameraConfig, ScanDirection
from .correct import (
    CorrectionResult,
    FitConfig,
    fit,
    fusion_mask,
    generate_video,
    interior_sample_rows,
    rs_to_gs,
)
from .distortion import (
    anchor_and_complementary_flows,
    cfr_reverse,
    distortion_time_map,
    reconstruct_rs_endpoints,
    reconstruct_rs_intermediate,
    time_mask,
)
from .errors import (
    DegenerateCropError,
    DegenerateGeometryError,
    DegenerateSegmentError,
    DomainError,
    DualRsError,
    FormatError,
    NonFiniteObjectiveError,
    ShapeError,
    TimingError,
    UnsatisfiableParametersError,
)
from .fileio import read_flo, read_pfm, read_png, write_flo, write_pfm, write_png
from .imaging import (
    GsSequence,
    RsImage,
    capture_dual_rs,
    gs_frame_stack,
    render_gs_at,
    render_rs_analytic,
    time_displacement,
)
from .losses import (
    LossBreakdown,
    LossWeights,
    boundary_crop,
    charbonnier,
    psnr,
    self_distillation_loss,
    self_supervised_loss,
    ssim,
    total_loss,
)
from .motion import (
    MotionModel,
    evaluate_motion,
    load_motion_model,
    save_motion_model,
)
from .warp import FlowField, backwarp, forward_splat, round_half_away

__version__ = "0.1.0"

__all__ = [
    "CameraConfig",
    "CorrectionResult",
    "DegenerateCropError",
    "DegenerateGeometryError",
    "DegenerateSegmentError",
    "DomainError",
    "DualRsError",
    "FitConfig",
    "FlowField",
    "FormatError",
    "GsSequence",
    "LossBreakdown",
    "LossWeights",
    "MotionModel",
    "NonFiniteObjectiveError",
    "RsImage",
    "ScanDirection",
    "ShapeError",
    "TimingError",
    "UnsatisfiableParametersError",
    "ambiguity_pair",
    "anchor_and_complementary_flows",
    "backwarp",
    "boundary_crop",
    "capture_dual_rs",
    "cfr_reverse",
    "charbonnier",
    "distortion_time_map",
    "evaluate_motion",
    "fit",
    "forward_splat",
    "fusion_mask",
    "generate_video",
    "gs_frame_stack",
    "interior_sample_rows",
    "load_motion_model",
    "psnr",
    "read_flo",
    "read_pfm",
    "read_png",
    "reconstruct_rs_endpoints",
    "reconstruct_rs_intermediate",
    "render_gs_at",
    "render_rs_analytic",
    "rs_to_gs",
    "round_half_away",
    "save_motion_model",
    "self_distillation_loss",
    "self_supervised_loss",
    "solve_matching_tilt",
    "ssim",
    "time_displacement",
    "time_mask",
    "total_loss",
    "write_flo",
    "write_pfm",
    "write_png",
]
