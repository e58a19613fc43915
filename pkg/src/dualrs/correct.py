"""Parametric rolling-shutter correction via self-supervised cycle fitting.

The corrector replaces a learned network with a low-parameter motion model
fitted directly to one dual reversed RS pair:

* rs_to_gs synthesizes the GS frame at any row instant m by backwarping
  both RS inputs along time-displacement-scaled motion and fusing them
  with an analytic time-proximity mask (rows captured closer to t_m in one
  image trust that image more). There is no learned residual; the fusion
  is purely geometric.
* fit searches motion parameters with Nelder-Mead, scoring each candidate
  by rebuilding both RS images from the synthesized GS frames (endpoint
  and intermediate routes through the distortion-warping module) and
  comparing against the inputs. The objective is derivative-free on
  purpose: splat target rounding makes it piecewise constant in places.

Intermediate supervision samples the readout span at interval
(tH - t1) / interval_divisor (7 interior instants by default) and averages
their losses, which keeps the objective deterministic across evaluations.
Later stages add a self-distillation term against center-cropped outputs
of the previous stage's frozen teacher; with momentum 1 the teacher never
moves, which is the recommended setting.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .camera import CameraConfig, ScanDirection
from .distortion import reconstruct_rs_endpoints, reconstruct_rs_intermediate
from .errors import DomainError, NonFiniteObjectiveError, ShapeError
from .imaging import GsSequence, RsImage, time_displacement
from .losses import (
    LossBreakdown,
    LossWeights,
    boundary_crop,
    charbonnier,
    self_distillation_loss,
    total_loss,
)
from .motion import MotionModel, evaluate_motion, initial_params, model_from_params
from .warp import DEFAULT_SPLAT_SIGMA, FlowField, backwarp, round_half_away

logger = logging.getLogger(__name__)

#: Simplex edge used to seed Nelder-Mead, per parameter kind.
_SIMPLEX_STEP_PIXELS = 1.0
_SIMPLEX_STEP_LINEAR = 0.02
#: Simplex spread tolerance (parameter units) paired with the objective tol.
_NM_XATOL = 1e-4
#: Deterministic offset used for the single restart from a perturbed simplex.
_RESTART_OFFSET = 0.37


@dataclass
class FitConfig:
    """Knobs of the self-supervised fit.

    interval_divisor splits the readout span for intermediate supervision
    (divisor 8 gives 7 interior sample instants). stages/crop/momentum
    control the self-distillation schedule: stages >= 2 adds a loss against
    boundary-cropped previous-stage outputs; momentum 1 freezes the teacher.
    """

    max_iters: int = 200
    tol: float = 1e-8
    interval_divisor: int = 8
    stages: int = 2
    crop: int = 32
    momentum: float = 1.0

    def __post_init__(self):
        if self.max_iters < 1:
            raise DomainError("max_iters must be >= 1")
        if self.interval_divisor < 1:
            raise DomainError("interval_divisor must be >= 1")
        if self.stages < 1:
            raise DomainError("stages must be >= 1")
        if self.crop < 0:
            raise DomainError("crop must be >= 0")
        if not 0.0 <= self.momentum <= 1.0:
            raise DomainError("momentum must lie in [0, 1]")


@dataclass
class CorrectionResult:
    """Outcome of a fit: frames, fitted model, trace, and diagnostics.

    loss_trace holds the best objective value after each accepted optimizer
    iteration, per stage in order; it is non-increasing within a stage.
    diagnostics carries iterations, converged, hole_fraction, and one record
    per stage (start/end losses, teacher parameter snapshots).
    """

    gs_frames: list[np.ndarray]
    gs_rows: list[int]
    fitted_model: MotionModel
    loss_trace: list[float]
    diagnostics: dict
    loss_records: list[dict] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return bool(self.diagnostics.get("converged", False))


def interior_sample_rows(rows: int, divisor: int) -> list[int]:
    """Interior readout instants at interval span/divisor, as integer rows.

    Instants fall at t1 + k * span / divisor for k = 1..divisor-1; each is
    rounded (half away from zero) to the nearest row and clamped to the
    interior [2, H-1], deduplicated.
    """
    if divisor < 1:
        raise DomainError("divisor must be >= 1")
    if rows < 3:
        return []
    out: list[int] = []
    for k in range(1, divisor):
        m = int(round_half_away(np.asarray(1.0 + k * (rows - 1) / divisor)))
        m = min(max(m, 2), rows - 1)
        if m not in out:
            out.append(m)
    return out


def fusion_mask(d_t2b: np.ndarray, d_b2t: np.ndarray) -> np.ndarray:
    """Time-proximity weight of the t2b warp in the GS fusion.

    Rows scanned closer in time to the target instant in the t2b capture
    get weight near 1, rows closer in the b2t capture near 0; equidistant
    rows (including the both-exact case) get 0.5.
    """
    a = np.abs(np.asarray(d_t2b, dtype=np.float64))
    b = np.abs(np.asarray(d_b2t, dtype=np.float64))
    if a.shape != b.shape:
        raise ShapeError("time displacement maps disagree in shape")
    tot = a + b
    mask = np.full_like(tot, 0.5)
    np.divide(b, tot, out=mask, where=tot > 0)
    return mask


def _check_dual_pair(rs_t2b: RsImage, rs_b2t: RsImage) -> CameraConfig:
    if rs_t2b.direction is not ScanDirection.T2B or rs_b2t.direction is not ScanDirection.B2T:
        raise DomainError("expected a (t2b, b2t) pair in that order")
    if rs_t2b.config != rs_b2t.config:
        raise DomainError("dual RS images must share one CameraConfig")
    if rs_t2b.pixels.shape != rs_b2t.pixels.shape:
        raise ShapeError("dual RS images disagree in shape")
    return rs_t2b.config


def rs_to_gs(rs_t2b: RsImage, rs_b2t: RsImage, model: MotionModel, m: int) -> np.ndarray:
    """Synthesize the GS frame at row instant m from the dual RS pair.

    Both inputs are backwarped along their time-displacement-scaled motion
    and fused row-wise by the time-proximity mask. The row scanned exactly
    at t_m needs no warp in its dominant image and passes through exactly.
    """
    config = _check_dual_pair(rs_t2b, rs_b2t)
    h, w = config.rows, config.cols
    vel = evaluate_motion(model, w, h)

    d_t2b = time_displacement(config, m, ScanDirection.T2B)
    d_b2t = time_displacement(config, m, ScanDirection.B2T)
    flow_t2b = FlowField(d_t2b[:, None] * vel.u, d_t2b[:, None] * vel.v)
    flow_b2t = FlowField(d_b2t[:, None] * vel.u, d_b2t[:, None] * vel.v)

    warped_t2b = backwarp(rs_t2b.pixels, flow_t2b).astype(np.float64)
    warped_b2t = backwarp(rs_b2t.pixels, flow_b2t).astype(np.float64)
    weight = fusion_mask(d_t2b, d_b2t)[:, None, None]
    fused = weight * warped_t2b + (1.0 - weight) * warped_b2t
    return np.clip(fused, 0.0, 1.0).astype(np.float32)


class _CycleObjective:
    """Evaluates the self-supervised loss of one candidate motion model."""

    def __init__(
        self,
        rs_t2b: RsImage,
        rs_b2t: RsImage,
        kind: str,
        cfg: FitConfig,
        weights: LossWeights,
        sigma: float = DEFAULT_SPLAT_SIGMA,
    ):
        self.rs_t2b = rs_t2b
        self.rs_b2t = rs_b2t
        self.kind = kind
        self.cfg = cfg
        self.weights = weights
        self.sigma = sigma
        self.config = _check_dual_pair(rs_t2b, rs_b2t)
        h = self.config.rows
        self.sample_rows = interior_sample_rows(h, cfg.interval_divisor)
        self.frame_rows = [1] + self.sample_rows + [h]

    def frames(self, params: np.ndarray) -> list[np.ndarray]:
        model = model_from_params(self.kind, params)
        return [rs_to_gs(self.rs_t2b, self.rs_b2t, model, m) for m in self.frame_rows]

    def _masked_loss(self, recon: RsImage, observed: RsImage) -> float:
        return self.weights.charbonnier_w * charbonnier(
            recon.pixels, observed.pixels, self.weights.eps, recon.hole_mask
        )

    def evaluate(
        self,
        params: np.ndarray,
        stage: int,
        pseudo: list[np.ndarray] | None,
    ) -> tuple[float, LossBreakdown, dict]:
        model = model_from_params(self.kind, params)
        config = self.config
        h, w = config.rows, config.cols
        vel = evaluate_motion(model, w, h)
        flow_fwd, flow_bwd = vel, vel.negated()

        gs = {m: rs_to_gs(self.rs_t2b, self.rs_b2t, model, m) for m in self.frame_rows}

        recon_ep = {
            d: reconstruct_rs_endpoints(
                gs[1], gs[h], flow_fwd, flow_bwd, d, self.sigma, config
            )
            for d in (ScanDirection.T2B, ScanDirection.B2T)
        }
        l_se = self._masked_loss(recon_ep[ScanDirection.T2B], self.rs_t2b) + self._masked_loss(
            recon_ep[ScanDirection.B2T], self.rs_b2t
        )

        hole_pixels = sum(int(r.hole_mask.sum()) for r in recon_ep.values())
        hole_total = 2 * h * w
        sme_terms: list[float] = []
        for m in self.sample_rows:
            seg_sm = vel.scaled((m - 1) / (h - 1))
            seg_me = vel.scaled((h - m) / (h - 1))
            term = 0.0
            for d, observed in (
                (ScanDirection.T2B, self.rs_t2b),
                (ScanDirection.B2T, self.rs_b2t),
            ):
                recon = reconstruct_rs_intermediate(
                    gs[1],
                    gs[m],
                    gs[h],
                    (seg_sm, seg_sm.negated()),
                    (seg_me, seg_me.negated()),
                    m,
                    d,
                    self.sigma,
                    config,
                )
                term += self._masked_loss(recon, observed)
                hole_pixels += int(recon.hole_mask.sum())
                hole_total += h * w
            sme_terms.append(term)
        l_sme = float(np.mean(sme_terms)) if sme_terms else 0.0

        l_sd = 0.0
        if stage >= 2:
            if pseudo is None:
                raise DomainError("stage >= 2 requires pseudo targets")
            l_sd = self_distillation_loss(
                [gs[m] for m in self.frame_rows], pseudo, self.cfg.crop, self.weights
            )

        breakdown = LossBreakdown(
            l_se=l_se,
            l_sme=l_sme,
            l_self=l_se + l_sme,
            l_sd=l_sd,
            total=0.0,
            pixel_counts={"per_image": h * w, "intermediate_samples": len(self.sample_rows)},
        )
        breakdown.total = total_loss(stage, breakdown)
        extras = {"hole_fraction": hole_pixels / hole_total}
        return breakdown.total, breakdown, extras


def _initial_simplex(x0: np.ndarray, kind: str) -> np.ndarray:
    steps = np.full(x0.size, _SIMPLEX_STEP_PIXELS)
    if kind == "affine":
        steps[:] = _SIMPLEX_STEP_LINEAR
        steps[2] = steps[5] = _SIMPLEX_STEP_PIXELS
    simplex = np.tile(x0, (x0.size + 1, 1))
    for i in range(x0.size):
        simplex[i + 1, i] += steps[i]
    return simplex


def fit(
    rs_t2b: RsImage,
    rs_b2t: RsImage,
    init: MotionModel | None = None,
    cfg: FitConfig | None = None,
    weights: LossWeights | None = None,
) -> CorrectionResult:
    """Fit the motion model minimizing the self-supervised cycle loss.

    Runs cfg.stages rounds of Nelder-Mead. Stage 1 minimizes the cycle
    loss alone; every later stage adds self-distillation against the
    boundary-cropped frames of the frozen (momentum-updated) teacher. A
    stage that stops on the iteration cap is restarted once from a
    perturbed simplex before being reported as unconverged.
    """
    cfg = cfg or FitConfig()
    weights = weights or LossWeights()
    init = init or MotionModel.zero()
    x0 = initial_params(init)
    objective = _CycleObjective(rs_t2b, rs_b2t, init.kind, cfg, weights)

    trace: list[float] = []
    records: list[dict] = []
    stage_infos: list[dict] = []
    params = x0
    teacher: np.ndarray | None = None
    converged_all = True
    total_evals = 0

    for stage in range(1, cfg.stages + 1):
        teacher_before = teacher.copy() if teacher is not None else None
        pseudo: list[np.ndarray] | None = None
        if stage >= 2:
            assert teacher is not None
            pseudo = objective.frames(teacher)
            # Validates the crop against the frame size before optimizing.
            boundary_crop(pseudo[0], cfg.crop)

        eval_count = 0
        best = np.inf
        teacher_trace: list[np.ndarray] = []
        stage_trace: list[float] = []

        def fun(theta: np.ndarray) -> float:
            nonlocal eval_count, best
            value, breakdown, extras = objective.evaluate(theta, stage, pseudo)
            if not np.isfinite(value):
                raise NonFiniteObjectiveError(
                    f"objective became non-finite at parameters {theta.tolist()}"
                )
            eval_count += 1
            best = min(best, value)
            records.append(
                {
                    "stage": stage,
                    "eval": eval_count,
                    "params": [float(t) for t in theta],
                    **breakdown.to_dict(),
                    **extras,
                }
            )
            if stage >= 2:
                teacher_trace.append(teacher.copy())
            return value

        def run(start: np.ndarray, simplex: np.ndarray):
            return minimize(
                fun,
                start,
                method="Nelder-Mead",
                callback=lambda xk: stage_trace.append(best),
                options={
                    "maxiter": cfg.max_iters,
                    "maxfev": 8 * cfg.max_iters,
                    "xatol": _NM_XATOL,
                    "fatol": cfg.tol,
                    "initial_simplex": simplex,
                    "disp": False,
                },
            )

        res = run(params, _initial_simplex(params, init.kind))
        restarted = False
        if not res.success:
            restarted = True
            bumped = res.x + _RESTART_OFFSET * (np.arange(res.x.size) % 2 * 2 - 1)
            simplex = _initial_simplex(bumped, init.kind)
            simplex[0] = res.x
            res = run(res.x, simplex)

        params = np.asarray(res.x, dtype=np.float64)
        stage_converged = bool(res.success)
        converged_all = converged_all and stage_converged
        total_evals += eval_count
        trace.extend(stage_trace)

        if stage == 1:
            teacher_after = params.copy()
        else:
            teacher_after = cfg.momentum * teacher + (1.0 - cfg.momentum) * params

        stage_infos.append(
            {
                "stage": stage,
                "evaluations": eval_count,
                "iterations": int(res.nit),
                "converged": stage_converged,
                "restarted": restarted,
                "start_loss": stage_trace[0] if stage_trace else float(res.fun),
                "end_loss": float(res.fun),
                "teacher_before": teacher_before,
                "teacher_after": teacher_after.copy(),
                "teacher_trace": teacher_trace,
                "pseudo_crop_shape": (
                    tuple(boundary_crop(pseudo[0], cfg.crop).shape) if pseudo else None
                ),
            }
        )
        teacher = teacher_after

    fitted = model_from_params(init.kind, params)
    _, final_breakdown, final_extras = objective.evaluate(
        params, cfg.stages, pseudo if cfg.stages >= 2 else None
    )
    gs_frames = objective.frames(params)

    diagnostics = {
        "converged": converged_all,
        "iterations": total_evals,
        "hole_fraction": final_extras["hole_fraction"],
        "final_breakdown": final_breakdown.to_dict(),
        "stages": stage_infos,
        "sample_rows": list(objective.sample_rows),
    }
    return CorrectionResult(
        gs_frames=gs_frames,
        gs_rows=list(objective.frame_rows),
        fitted_model=fitted,
        loss_trace=trace,
        diagnostics=diagnostics,
        loss_records=records,
    )


def generate_video(
    rs_t2b: RsImage,
    rs_b2t: RsImage,
    model: MotionModel,
    count: int,
) -> GsSequence:
    """GS frames at `count` row instants evenly spaced over the readout.

    Instants are rounded to integer rows and deduplicated; a count beyond
    the row count is clipped with a warning.
    """
    config = _check_dual_pair(rs_t2b, rs_b2t)
    if count < 2:
        raise DomainError(f"need at least 2 frames, got {count}")
    if count > config.rows:
        logger.warning(
            "requested %d frames but only %d rows exist; clipping", count, config.rows
        )
        count = config.rows
    targets = np.linspace(1.0, float(config.rows), count)
    rows = sorted({int(round_half_away(np.asarray(t))) for t in targets})
    frames = [rs_to_gs(rs_t2b, rs_b2t, model, m) for m in rows]
    times = [config.row_time(m) for m in rows]
    return GsSequence(frames, np.asarray(times))
