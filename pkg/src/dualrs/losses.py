"""Objective terms and image-quality metrics.

The self-supervised objective scores how well RS images rebuilt from the
corrector's GS frames match the captured inputs. All pixel losses are
Charbonnier, sqrt(d^2 + eps^2), so a perfect reconstruction still scores
the floor eps per pixel; composite losses therefore have documented floors
(4 * eps for the self-supervised pair of pairs, eps per frame for
distillation). Pixels flagged as holes by the reconstruction are excluded
from the means since no valid supervision exists there.

PSNR and SSIM follow the standard definitions for [0, 1] images: PSNR is
10 * log10(1 / MSE) with +inf for identical inputs, SSIM uses an 11x11
Gaussian window with sigma 1.5 and stabilizers C1 = 0.01^2, C2 = 0.03^2,
averaged over valid window positions and channels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.signal import convolve2d

from .errors import DegenerateCropError, DomainError, ShapeError
from .imaging import RsImage

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_C1 = 0.01**2
SSIM_C2 = 0.03**2

#: Smallest usable center region after boundary cropping, in pixels.
MIN_CROP_REMAINDER = 8


@dataclass
class LossWeights:
    """Weights of the reconstruction loss terms.

    The perceptual term is a hook: it only contributes when the caller
    supplies `perceptual_transform` (mapping an image to a feature array)
    and a positive `perceptual_w`. By default it is off.
    """

    charbonnier_w: float = 1.0
    perceptual_w: float = 0.0
    eps: float = 1e-3
    perceptual_transform: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if self.charbonnier_w < 0 or self.perceptual_w < 0:
            raise DomainError("loss weights must be non-negative")
        if not self.eps > 0:
            raise DomainError("Charbonnier eps must be positive")


@dataclass
class LossBreakdown:
    """Per-term values of one objective evaluation."""

    l_se: float
    l_sme: float
    l_self: float
    l_sd: float
    total: float
    pixel_counts: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "l_se": self.l_se,
            "l_sme": self.l_sme,
            "l_self": self.l_self,
            "l_sd": self.l_sd,
            "total": self.total,
            "pixel_counts": dict(self.pixel_counts),
        }


def charbonnier(
    a: np.ndarray,
    b: np.ndarray,
    eps: float = 1e-3,
    exclude_mask: np.ndarray | None = None,
) -> float:
    """Mean of sqrt((a - b)^2 + eps^2) over pixels and channels.

    `exclude_mask` (H, W) removes pixels from the mean. The value floors
    at eps when a == b.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch {a.shape} vs {b.shape}")
    diff2 = (a - b) ** 2
    vals = np.sqrt(diff2 + eps * eps)
    if exclude_mask is None:
        return float(vals.mean())
    keep = ~np.asarray(exclude_mask, dtype=bool)
    if vals.ndim == 3:
        keep = np.broadcast_to(keep[..., None], vals.shape)
    if not keep.any():
        raise DomainError("every pixel is hole-masked; loss undefined")
    return float(vals[keep].mean())


def _pair_loss(recon: RsImage, observed: RsImage, w: LossWeights) -> tuple[float, int]:
    """Weighted reconstruction loss of one RS image against its capture."""
    if recon.pixels.shape != observed.pixels.shape:
        raise ShapeError("reconstruction and input shapes differ")
    mask = recon.hole_mask
    value = w.charbonnier_w * charbonnier(recon.pixels, observed.pixels, w.eps, mask)
    if w.perceptual_transform is not None and w.perceptual_w > 0:
        value += w.perceptual_w * charbonnier(
            w.perceptual_transform(recon.pixels),
            w.perceptual_transform(observed.pixels),
            w.eps,
        )
    count = recon.pixels.shape[0] * recon.pixels.shape[1]
    if mask is not None:
        count -= int(mask.sum())
    return value, count


def self_supervised_loss(
    inputs: tuple[RsImage, RsImage],
    recon_endpoints: tuple[RsImage, RsImage],
    recon_intermediate: tuple[RsImage, RsImage],
    weights: LossWeights | None = None,
) -> LossBreakdown:
    """Cycle-consistency loss of both reconstruction routes.

    `inputs` is the captured (t2b, b2t) pair; `recon_endpoints` the pair
    rebuilt from the start/end GS frames; `recon_intermediate` the pair
    routed through an intermediate GS frame. Floors at 4 * eps when every
    reconstruction is perfect.
    """
    w = weights or LossWeights()
    in_t2b, in_b2t = inputs
    counts: dict[str, int] = {}

    se_t2b, counts["se_t2b"] = _pair_loss(recon_endpoints[0], in_t2b, w)
    se_b2t, counts["se_b2t"] = _pair_loss(recon_endpoints[1], in_b2t, w)
    sme_t2b, counts["sme_t2b"] = _pair_loss(recon_intermediate[0], in_t2b, w)
    sme_b2t, counts["sme_b2t"] = _pair_loss(recon_intermediate[1], in_b2t, w)

    l_se = se_t2b + se_b2t
    l_sme = sme_t2b + sme_b2t
    l_self = l_se + l_sme
    return LossBreakdown(
        l_se=l_se,
        l_sme=l_sme,
        l_self=l_self,
        l_sd=0.0,
        total=l_self,
        pixel_counts=counts,
    )


def boundary_crop(image: np.ndarray, p: int) -> np.ndarray:
    """Remove p rows/columns from every border."""
    image = np.asarray(image)
    if p < 0:
        raise DomainError(f"crop size must be >= 0, got {p}")
    if p == 0:
        return image
    h, w = image.shape[:2]
    if min(h, w) - 2 * p < MIN_CROP_REMAINDER:
        raise DegenerateCropError(
            f"crop p={p} leaves less than {MIN_CROP_REMAINDER} px of a {h}x{w} image"
        )
    return image[p : h - p, p : w - p]


def self_distillation_loss(
    current: list[np.ndarray],
    pseudo: list[np.ndarray],
    p: int,
    weights: LossWeights | None = None,
) -> float:
    """Sum of Charbonnier terms between center crops of matched GS frames.

    Each pseudo frame is cropped by p; the matching current frame is
    cropped too unless it already comes at the cropped size (a pipeline
    that crops its stage inputs produces such frames directly). Floors at
    eps per frame pair.
    """
    w = weights or LossWeights()
    if len(current) != len(pseudo):
        raise ShapeError(
            f"{len(current)} current frames vs {len(pseudo)} pseudo frames"
        )
    total = 0.0
    for cur, ref in zip(current, pseudo):
        target = boundary_crop(np.asarray(ref), p)
        cur = np.asarray(cur)
        if cur.shape == target.shape:
            pass
        elif cur.shape[:2] == np.asarray(ref).shape[:2]:
            cur = boundary_crop(cur, p)
        else:
            raise ShapeError(
                f"current frame {cur.shape} matches neither pseudo {np.asarray(ref).shape} "
                f"nor its crop {target.shape}"
            )
        total += w.charbonnier_w * charbonnier(cur, target, w.eps)
    return total


def total_loss(stage: int, breakdown: LossBreakdown) -> float:
    """Stage schedule: stage 1 trains on l_self alone, later stages add l_sd."""
    if stage < 1:
        raise DomainError(f"stage must be >= 1, got {stage}")
    if stage == 1:
        return breakdown.l_self
    return breakdown.l_self + breakdown.l_sd


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB for [0, 1] images; +inf if identical."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch {a.shape} vs {b.shape}")
    for name, arr in (("first", a), ("second", b)):
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise DomainError(f"{name} image has values outside [0, 1]")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def _gaussian_kernel(size: int, sigma: float) -> np.ndarray:
    half = (size - 1) / 2.0
    coords = np.arange(size, dtype=np.float64) - half
    g = np.exp(-(coords**2) / (2.0 * sigma * sigma))
    kernel = np.outer(g, g)
    return kernel / kernel.sum()


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Structural similarity with the standard 11x11 Gaussian window.

    Statistics are Gaussian-weighted over valid window positions only (no
    padding), then averaged over windows and channels.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch {a.shape} vs {b.shape}")
    if a.ndim == 2:
        a = a[..., None]
        b = b[..., None]
    if a.shape[0] < SSIM_WINDOW or a.shape[1] < SSIM_WINDOW:
        raise ShapeError(
            f"image smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} SSIM window"
        )
    kernel = _gaussian_kernel(SSIM_WINDOW, SSIM_SIGMA)

    def win(x: np.ndarray) -> np.ndarray:
        return convolve2d(x, kernel, mode="valid")

    scores = []
    for c in range(a.shape[2]):
        xa, xb = a[..., c], b[..., c]
        mu_a = win(xa)
        mu_b = win(xb)
        var_a = win(xa * xa) - mu_a * mu_a
        var_b = win(xb * xb) - mu_b * mu_b
        cov = win(xa * xb) - mu_a * mu_b
        num = (2.0 * mu_a * mu_b + SSIM_C1) * (2.0 * cov + SSIM_C2)
        den = (mu_a * mu_a + mu_b * mu_b + SSIM_C1) * (var_a + var_b + SSIM_C2)
        scores.append(float((num / den).mean()))
    return float(np.mean(scores))
