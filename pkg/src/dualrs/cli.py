"""Command-line front end.

Subcommands:
    synth           simulate a dual reversed RS capture from GS content
    correct         fit the motion model and emit a GS sequence
    eval            PSNR/SSIM between two directories of PFM frames
    demo-ambiguity  render the consecutive-frame ambiguity rod pair

Conventions: exit 0 on success, 1 on runtime failure, 2 on usage or
precondition violations; every failure prints a single diagnostic line to
stderr and removes files the failed run had created. Each command echoes
its argv into `run.args` in the output directory. PFM files carry the
authoritative floats; PNGs are previews. The RSC_THREADS environment
variable caps internal parallelism (the current implementation is
single-threaded, so any positive value is honored trivially).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import shlex
import sys
from pathlib import Path

import numpy as np

from .ambiguity import ambiguity_pair, solve_matching_tilt
from .camera import CameraConfig, ScanDirection
from .correct import FitConfig, fit, generate_video
from .errors import (
    DegenerateCropError,
    DegenerateGeometryError,
    DegenerateSegmentError,
    DomainError,
    DualRsError,
    ShapeError,
    TimingError,
    UnsatisfiableParametersError,
)

#: Library errors that signal a violated precondition (exit 2, not 1).
_PRECONDITION_ERRORS = (
    DomainError,
    DegenerateCropError,
    DegenerateGeometryError,
    DegenerateSegmentError,
    ShapeError,
    TimingError,
    UnsatisfiableParametersError,
)
from .fileio import read_pfm, write_pfm, write_png
from .imaging import GsSequence, RsImage, capture_dual_rs, gs_frame_stack
from .losses import psnr, ssim
from .motion import MotionModel, save_motion_model
from .textures import checkerboard, windowed_noise

#: PSNR reported for identical frames in CLI output (library returns inf).
PSNR_SENTINEL_DB = 99.0

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


class _UsageError(DualRsError):
    """Precondition failure that should exit with code 2."""


class _OutputTracker:
    """Records files written by a command so failures can clean them up."""

    def __init__(self):
        self.paths: list[Path] = []

    def register(self, path: str | Path) -> Path:
        p = Path(path)
        self.paths.append(p)
        return p

    def cleanup(self) -> None:
        for p in self.paths:
            try:
                p.unlink(missing_ok=True)
            except OSError:
                pass


def _parse_motion(text: str) -> MotionModel:
    parts = [p.strip() for p in text.split(",")]
    try:
        values = [float(p) for p in parts]
    except ValueError:
        raise _UsageError(f"--motion expects numbers, got {text!r}") from None
    if len(values) == 2:
        return MotionModel.translation(values[0], values[1])
    if len(values) == 6:
        return MotionModel.affine(values)
    raise _UsageError("--motion expects 'vx,vy' or 6 affine numbers")


def _out_dir(args, tracker: _OutputTracker) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    run_args = tracker.register(out / "run.args")
    run_args.write_text(" ".join(shlex.quote(a) for a in sys.argv[1:]) + "\n")
    return out


def _write_image(tracker: _OutputTracker, path: Path, image: np.ndarray) -> None:
    write_pfm(tracker.register(path), image)
    write_png(tracker.register(path.with_suffix(".png")), np.clip(image, 0.0, 1.0))


def _load_base(args) -> np.ndarray:
    if args.base == "checker":
        if args.rows is None:
            raise _UsageError("--base checker needs --rows")
        return checkerboard(args.rows, args.rows)
    if args.base == "noise":
        if args.rows is None:
            raise _UsageError("--base noise needs --rows")
        return windowed_noise(args.rows, args.rows, seed=args.seed)
    return read_pfm(args.base)


def cmd_synth(args, tracker: _OutputTracker) -> int:
    if args.rows is not None and args.rows < 2:
        raise _UsageError(f"--rows {args.rows} is degenerate; need at least 2 rows")
    out = _out_dir(args, tracker)

    if args.gs_dir:
        frames = sorted(Path(args.gs_dir).glob("*.pfm"))
        if not frames:
            raise _UsageError(f"no .pfm frames found in {args.gs_dir}")
        stack = [read_pfm(p) for p in frames]
        h, w = stack[0].shape[:2]
        rows = args.rows if args.rows is not None else len(stack)
        if rows != len(stack):
            raise _UsageError(f"--rows {rows} but {len(stack)} frames supplied")
        if rows != h:
            raise _UsageError(f"frames are {h} rows tall but --rows is {rows}")
        config = CameraConfig(rows=rows, cols=w, readout=args.readout)
        seq = GsSequence(stack, config.row_times())
        model = None
    else:
        if args.motion is None:
            raise _UsageError("need --gs-dir or --base with --motion")
        base = _load_base(args)
        h, w = base.shape[:2]
        rows = args.rows if args.rows is not None else h
        if rows != h:
            raise _UsageError(f"--rows {rows} does not match base height {h}")
        config = CameraConfig(rows=rows, cols=w, readout=args.readout)
        model = _parse_motion(args.motion)
        seq = gs_frame_stack(base, model, config)

    rs_t2b, rs_b2t = capture_dual_rs(seq, config)
    _write_image(tracker, out / "t2b.pfm", rs_t2b.pixels)
    _write_image(tracker, out / "b2t.pfm", rs_b2t.pixels)
    for i, frame in enumerate(seq.frames):
        write_pfm(tracker.register(out / f"gs_{i:03d}.pfm"), frame)
    write_png(tracker.register(out / "gs_preview.png"), seq.frames[0])
    if model is not None:
        save_motion_model(tracker.register(out / "model.txt"), model, config)
    print(f"wrote dual RS pair and {len(seq)} GS frames to {out}")
    return EXIT_OK


def cmd_correct(args, tracker: _OutputTracker) -> int:
    out = _out_dir(args, tracker)
    t2b_px = read_pfm(args.t2b)
    b2t_px = read_pfm(args.b2t)
    if t2b_px.shape != b2t_px.shape:
        raise _UsageError(
            f"dual inputs disagree in shape: {t2b_px.shape} vs {b2t_px.shape}"
        )
    h, w = t2b_px.shape[:2]
    if h < 2:
        raise _UsageError(f"input has {h} rows; rolling shutter needs at least 2")
    config = CameraConfig(rows=h, cols=w, readout=args.readout)
    rs_t2b = RsImage(np.clip(t2b_px, 0.0, 1.0), ScanDirection.T2B, config)
    rs_b2t = RsImage(np.clip(b2t_px, 0.0, 1.0), ScanDirection.B2T, config)

    cfg = FitConfig(
        max_iters=args.max_iters,
        tol=args.tol,
        interval_divisor=args.divisor,
        stages=args.stages,
        crop=args.crop,
        momentum=args.momentum,
    )
    init = MotionModel.zero() if args.model_kind == "translation" else MotionModel.affine(
        [1, 0, 0, 0, 1, 0]
    )
    result = fit(rs_t2b, rs_b2t, init=init, cfg=cfg)

    video = generate_video(rs_t2b, rs_b2t, result.fitted_model, args.frames)
    for i, frame in enumerate(video.frames):
        _write_image(tracker, out / f"gs_{i:03d}.pfm", frame)
    save_motion_model(tracker.register(out / "model.txt"), result.fitted_model, config)

    trace_path = tracker.register(out / "loss_trace.csv")
    with open(trace_path, "w") as f:
        f.write("iteration,best_objective\n")
        for i, value in enumerate(result.loss_trace):
            f.write(f"{i},{value!r}\n")

    metrics_path = tracker.register(out / "metrics.jsonl")
    with open(metrics_path, "w") as f:
        for record in result.loss_records:
            f.write(json.dumps(record) + "\n")

    params = ",".join(f"{p:.4f}" for p in np.atleast_1d(result.fitted_model.params))
    print(
        f"fitted {result.fitted_model.kind} [{params}] "
        f"converged={result.converged} evals={result.diagnostics['iterations']} "
        f"frames={len(video.frames)}"
    )
    return EXIT_OK


def _metric_record(name: str, value_psnr: float, value_ssim: float) -> dict:
    capped = PSNR_SENTINEL_DB if math.isinf(value_psnr) else value_psnr
    return {"frame": name, "psnr_db": capped, "ssim": value_ssim}


def cmd_eval(args, tracker: _OutputTracker) -> int:
    pred = sorted(Path(args.pred_dir).glob("*.pfm"))
    gt = sorted(Path(args.gt_dir).glob("*.pfm"))
    if not pred or not gt:
        raise _UsageError("both --pred-dir and --gt-dir need .pfm frames")
    if len(pred) != len(gt):
        raise _UsageError(f"frame count mismatch: {len(pred)} pred vs {len(gt)} gt")
    out = _out_dir(args, tracker)

    records = []
    for p, g in zip(pred, gt):
        a = np.clip(read_pfm(p), 0.0, 1.0)
        b = np.clip(read_pfm(g), 0.0, 1.0)
        records.append(_metric_record(p.name, psnr(a, b), ssim(a, b)))
    mean_psnr = float(np.mean([r["psnr_db"] for r in records]))
    mean_ssim = float(np.mean([r["ssim"] for r in records]))
    records.append({"frame": "mean", "psnr_db": mean_psnr, "ssim": mean_ssim})

    metrics_path = tracker.register(out / "metrics.jsonl")
    with open(metrics_path, "w") as f:
        for record in records:
            f.write(json.dumps(record) + "\n")

    width = max(len(r["frame"]) for r in records)
    print(f"{'frame'.ljust(width)}  psnr_db   ssim")
    for r in records:
        print(f"{r['frame'].ljust(width)}  {r['psnr_db']:7.3f}  {r['ssim']:.5f}")
    return EXIT_OK


def cmd_demo_ambiguity(args, tracker: _OutputTracker) -> int:
    out = _out_dir(args, tracker)
    tilt = args.tilt_deg
    solved = solve_matching_tilt(args.v1, args.tau1, args.v2, args.tau2)
    tilted, vertical = ambiguity_pair(
        tilt, (args.v1, args.v2), (args.tau1, args.tau2), rows=args.rows, cols=args.rows
    )
    _write_image(tracker, out / "rod_tilted.pfm", tilted.pixels)
    _write_image(tracker, out / "rod_vertical.pfm", vertical.pixels)

    maxdiff = float(np.abs(tilted.pixels - vertical.pixels).max())
    identical = maxdiff == 0.0
    shown = solved if tilt is None else tilt
    print(
        f"tilt={shown:.6f} deg (matching tilt {solved:.6f}), "
        f"identical: {str(identical).lower()}, maxdiff {maxdiff:g}"
    )
    return EXIT_OK if identical else EXIT_RUNTIME


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dualrs",
        description="Dual reversed rolling-shutter simulation and correction.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="simulate a dual reversed RS capture")
    p.add_argument("--gs-dir", help="directory with H per-instant GS frames (*.pfm)")
    p.add_argument("--base", help="base GS image (.pfm), 'checker', or 'noise'")
    p.add_argument("--motion", help="vx,vy translation (or 6 affine numbers) per readout span")
    p.add_argument("--rows", type=int, default=None, help="row count H")
    p.add_argument("--readout", type=float, default=1.0, help="per-row readout seconds")
    p.add_argument("--seed", type=int, default=0, help="seed for generated textures")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("correct", help="fit motion and emit a GS sequence")
    p.add_argument("--t2b", required=True, help="top-to-bottom RS capture (.pfm)")
    p.add_argument("--b2t", required=True, help="bottom-to-top RS capture (.pfm)")
    p.add_argument("--frames", type=int, default=9, help="GS frames to generate")
    p.add_argument("--stages", type=int, default=1, help="fit stages (>=2 adds distillation)")
    p.add_argument("--crop", type=int, default=32, help="distillation boundary crop px")
    p.add_argument("--momentum", type=float, default=1.0, help="teacher momentum c")
    p.add_argument("--divisor", type=int, default=8, help="intermediate sampling divisor")
    p.add_argument("--max-iters", type=int, default=200, help="optimizer iteration cap per stage")
    p.add_argument("--tol", type=float, default=1e-8, help="objective tolerance")
    p.add_argument("--readout", type=float, default=1.0, help="per-row readout seconds")
    p.add_argument(
        "--model-kind", choices=["translation", "affine"], default="translation"
    )
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_correct)

    p = sub.add_parser("eval", help="PSNR/SSIM between two frame directories")
    p.add_argument("--pred-dir", required=True)
    p.add_argument("--gt-dir", required=True)
    p.add_argument("--out", default=".", help="where to write metrics.jsonl")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("demo-ambiguity", help="render the ambiguity rod pair")
    p.add_argument("--v1", type=float, default=2.0, help="camera 1 speed px/s")
    p.add_argument("--v2", type=float, default=4.0, help="camera 2 speed px/s")
    p.add_argument("--tau1", type=float, default=0.2, help="camera 1 readout s/row")
    p.add_argument("--tau2", type=float, default=0.1, help="camera 2 readout s/row")
    p.add_argument("--tilt-deg", type=float, default=None, help="override the solved tilt")
    p.add_argument("--rows", type=int, default=64)
    p.add_argument("--out", default="ambiguity_out", help="output directory")
    p.set_defaults(func=cmd_demo_ambiguity)

    return parser


def _check_threads_env() -> None:
    raw = os.environ.get("RSC_THREADS")
    if raw is None:
        return
    try:
        threads = int(raw)
    except ValueError:
        raise _UsageError(f"RSC_THREADS must be an integer, got {raw!r}") from None
    if threads < 1:
        raise _UsageError(f"RSC_THREADS must be >= 1, got {threads}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    tracker = _OutputTracker()
    try:
        _check_threads_env()
        return args.func(args, tracker)
    except _UsageError as exc:
        tracker.cleanup()
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DualRsError, OSError) as exc:
        code = EXIT_USAGE if isinstance(exc, _PRECONDITION_ERRORS) else EXIT_RUNTIME
        tracker.cleanup()
        print(f"error: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
