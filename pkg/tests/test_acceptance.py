"""Acceptance suite: one test per criterion, each printing a verdict line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines. Every tolerance is pinned here; the timing budgets are asserted
(the optional JIT kernels are warmed once by the session fixture before
anything is timed).
"""

import math
import time

import numpy as np

from dualrs import (
    CameraConfig,
    FitConfig,
    FlowField,
    GsSequence,
    LossBreakdown,
    MotionModel,
    ambiguity_pair,
    boundary_crop,
    capture_dual_rs,
    cfr_reverse,
    distortion_time_map,
    fit,
    psnr,
    read_flo,
    read_pfm,
    render_gs_at,
    render_rs_analytic,
    solve_matching_tilt,
    time_displacement,
    time_mask,
    total_loss,
    write_flo,
    write_pfm,
)
from dualrs.correct import _CycleObjective
from dualrs.losses import LossWeights
from dualrs.textures import windowed_noise

from conftest import interior
from oracles import brute_cfr_holes, grid_search_minimum

EPS = 1e-3


def _report(n, elapsed, limit, detail):
    line = f"[PASS] criterion {n}: {detail} ({elapsed:.2f}s"
    line += f" < {limit:g}s)" if limit else ")"
    print(line)


def test_criterion_1_static_scene_fixpoint():
    start = time.perf_counter()
    worst_floor = 0.0
    worst_fit = 0.0
    for seed in range(20):
        texture = windowed_noise(64, 64, seed=100 + seed)
        config = CameraConfig(rows=64, cols=64)

        seq = GsSequence([texture.copy() for _ in range(64)], config.row_times())
        rs_t2b, rs_b2t = capture_dual_rs(seq, config)
        assert np.array_equal(rs_t2b.pixels, rs_b2t.pixels)
        assert np.array_equal(rs_t2b.pixels, texture)

        objective = _CycleObjective(
            rs_t2b, rs_b2t, "translation", FitConfig(), LossWeights()
        )
        _, breakdown, _ = objective.evaluate(np.zeros(2), 1, None)
        worst_floor = max(worst_floor, abs(breakdown.l_self - 4 * EPS))
        assert abs(breakdown.l_self - 4 * EPS) < 1e-6

        result = fit(
            rs_t2b,
            rs_b2t,
            cfg=FitConfig(stages=1, interval_divisor=2, max_iters=80, tol=1e-7),
        )
        err = float(np.abs(result.fitted_model.params).max())
        worst_fit = max(worst_fit, err)
        assert err <= 0.05

    elapsed = time.perf_counter() - start
    assert elapsed < 10.0
    _report(
        1,
        elapsed,
        10,
        f"20 static textures: dual captures identical, |L_self - 4eps| <= "
        f"{worst_floor:.1e}, fitted |v| <= {worst_fit:.3f} px",
    )


def test_criterion_2_constant_flow_cfr_closed_form():
    start = time.perf_counter()
    worst = 0.0
    for rows in (8, 64):
        for v in (1.0, 2.0, 3.5):
            fwd = FlowField.constant(rows, rows, v, 0.0)
            bwd = FlowField.constant(rows, rows, -v, 0.0)
            tmap = distortion_time_map(rows, "s2e")
            rev_fwd, rev_bwd = cfr_reverse(fwd, bwd, tmap)

            expect_fwd = -tmap[:, None] * v
            expect_bwd = (1.0 - tmap)[:, None] * v
            keep = ~rev_fwd.hole_mask
            err = max(
                np.abs(rev_fwd.u - expect_fwd)[keep].max(),
                np.abs(rev_bwd.u - expect_bwd)[keep].max(),
                np.abs(rev_fwd.v).max(),
                np.abs(rev_bwd.v).max(),
            )
            worst = max(worst, float(err))
            assert err < 1e-6

            oracle = brute_cfr_holes(fwd, bwd, tmap)
            assert np.array_equal(rev_fwd.hole_mask, oracle)
            assert np.array_equal(rev_bwd.hole_mask, oracle)

    elapsed = time.perf_counter() - start
    assert elapsed < 5.0
    _report(
        2,
        elapsed,
        5,
        f"H in {{8,64}} x v in {{1,2,3.5}}: closed form exact (max err {worst:.1e}), "
        "hole sets match the brute-force splatter",
    )


def test_criterion_3_cycle_consistency_at_ground_truth():
    from dualrs import evaluate_motion, reconstruct_rs_endpoints, reconstruct_rs_intermediate

    start = time.perf_counter()
    size = 64
    v = 2.0
    band = math.ceil(v)
    base = windowed_noise(size, size, seed=300, smoothness=3.0)
    config = CameraConfig(rows=size, cols=size)
    model = MotionModel.translation(v, 0.0)
    vel = evaluate_motion(model, size, size)
    m = size // 2
    gs_start = render_gs_at(base, model, 0.0)
    gs_mid = render_gs_at(base, model, (m - 1) / (size - 1))
    gs_end = render_gs_at(base, model, 1.0)
    seg_sm = vel.scaled((m - 1) / (size - 1))
    seg_me = vel.scaled((size - m) / (size - 1))

    worst = math.inf
    for direction in ("t2b", "b2t"):
        ref = render_rs_analytic(base, model, config, direction)
        endpoint = reconstruct_rs_endpoints(
            gs_start, gs_end, vel, vel.negated(), direction, config=config
        )
        middle = reconstruct_rs_intermediate(
            gs_start,
            gs_mid,
            gs_end,
            (seg_sm, seg_sm.negated()),
            (seg_me, seg_me.negated()),
            m,
            direction,
            config=config,
        )
        for recon in (endpoint, middle):
            value = psnr(interior(recon.pixels, band), interior(ref.pixels, band))
            worst = min(worst, value)
            assert value > 40.0

    elapsed = time.perf_counter() - start
    assert elapsed < 10.0
    _report(
        3,
        elapsed,
        10,
        f"endpoint and mid-split reconstructions vs analytic render: "
        f"interior PSNR >= {worst:.1f} dB (> 40 dB)",
    )


def test_criterion_4_self_supervised_recovery():
    start = time.perf_counter()
    plants = [(3.0, 0.0), (0.0, 2.0), (2.0, -1.0)]
    details = []
    for i, (vx, vy) in enumerate(plants):
        size = 64
        base = windowed_noise(size, size, seed=400 + i, smoothness=3.0)
        config = CameraConfig(rows=size, cols=size)
        model = MotionModel.translation(vx, vy)
        rs_t2b = render_rs_analytic(base, model, config, "t2b")
        rs_b2t = render_rs_analytic(base, model, config, "b2t")

        cfg = FitConfig(stages=1, max_iters=200, tol=1e-9)
        result = fit(rs_t2b, rs_b2t, cfg=cfg)
        fit_err = float(np.abs(result.fitted_model.params - [vx, vy]).max())
        assert fit_err <= 0.1

        # oracle: the objective's own minimizer on a 0.05 px grid lies
        # within one step of the plant (coarse sweep over [-5, 5]^2, then
        # a fine 0.05 px grid around the coarse argmin)
        objective = _CycleObjective(rs_t2b, rs_b2t, "translation", cfg, LossWeights())

        def fun(theta):
            value, _, _ = objective.evaluate(theta, 1, None)
            return value

        coarse, _ = grid_search_minimum(fun, np.zeros(2), radius=5.0, step=0.5)
        fine, _ = grid_search_minimum(fun, coarse, radius=0.35, step=0.05)
        oracle_err = float(np.abs(fine - [vx, vy]).max())
        assert oracle_err <= 0.05 + 1e-12

        band = math.ceil(max(abs(vx), abs(vy))) + 1
        h = config.rows
        worst_psnr = math.inf
        for row, frame in zip(result.gs_rows, result.gs_frames):
            truth = render_gs_at(base, model, (row - 1) / (h - 1))
            worst_psnr = min(worst_psnr, psnr(interior(frame, band), interior(truth, band)))
        assert worst_psnr > 30.0
        details.append(
            f"({vx:g},{vy:g}): fit err {fit_err:.3f} px, oracle err {oracle_err:.2f}, "
            f"GS PSNR {worst_psnr:.1f} dB"
        )

    elapsed = time.perf_counter() - start
    assert elapsed < 120.0
    _report(4, elapsed, 120, "; ".join(details))


def test_criterion_5_self_distillation_plumbing():
    start = time.perf_counter()

    # (a) pseudo-target crops at the published training size
    big = np.zeros((320, 320, 1), np.float32)
    assert boundary_crop(big, 32).shape == (256, 256, 1)
    size = 320
    config = CameraConfig(rows=size, cols=size)
    from dualrs import RsImage

    texture = windowed_noise(size, size, seed=500)
    rs_t2b = RsImage(texture, "t2b", config)
    rs_b2t = RsImage(texture, "b2t", config)
    objective = _CycleObjective(
        rs_t2b, rs_b2t, "translation", FitConfig(crop=32), LossWeights()
    )
    pseudo = objective.frames(np.zeros(2))
    crops = [boundary_crop(f, 32) for f in pseudo]
    assert all(c.shape == (256, 256, 1) for c in crops)

    # (b) stage schedule branch values are exactly l_self and l_self + l_sd
    bd = LossBreakdown(l_se=0.04, l_sme=0.06, l_self=0.1, l_sd=0.05, total=0.0)
    assert total_loss(1, bd) == bd.l_self
    assert total_loss(2, bd) == bd.l_self + bd.l_sd
    assert total_loss(3, bd) == total_loss(2, bd)

    # (c) momentum 1 freezes the teacher bit-for-bit across stage-2 evals
    small = windowed_noise(64, 64, seed=501)
    cfg64 = CameraConfig(rows=64, cols=64)
    pair = (RsImage(small, "t2b", cfg64), RsImage(small, "b2t", cfg64))
    result = fit(
        pair[0],
        pair[1],
        cfg=FitConfig(
            stages=2, crop=8, interval_divisor=2, max_iters=40, tol=1e-7, momentum=1.0
        ),
    )
    stage1, stage2 = result.diagnostics["stages"]
    teacher = stage1["teacher_after"]
    assert stage2["teacher_trace"]
    for snapshot in stage2["teacher_trace"]:
        assert np.array_equal(snapshot, teacher)
    assert np.array_equal(stage2["teacher_after"], teacher)
    assert stage2["pseudo_crop_shape"] == (48, 48, 1)

    elapsed = time.perf_counter() - start
    _report(
        5,
        elapsed,
        0,
        "320x320 pseudo crops are 256x256, stage schedule exact, "
        f"teacher frozen across {len(stage2['teacher_trace'])} stage-2 evals",
    )


def test_criterion_6_time_map_mask_algebra():
    start = time.perf_counter()
    for rows in range(2, 66):
        config = CameraConfig(rows=rows, cols=2)
        s2e = distortion_time_map(rows, "s2e")
        e2s = distortion_time_map(rows, "e2s")
        assert np.array_equal(s2e + e2s, np.ones(rows))
        for m in range(1, rows + 1):
            d_t2b = time_displacement(config, m, "t2b")
            d_b2t = time_displacement(config, m, "b2t")
            assert d_t2b[m - 1] == 0.0
            assert d_b2t[rows - m] == 0.0
            assert np.abs(d_t2b).max() <= 1.0 and np.abs(d_b2t).max() <= 1.0
            u = time_mask(rows, m, "t2b")
            assert np.array_equal(u + (1.0 - u), np.ones(rows))
            assert u.sum() == m
            assert np.array_equal(time_mask(rows, m, "b2t"), u[::-1])
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    _report(6, elapsed, 1, "complement, antisymmetry, and mask partition exact for H in [2..65]")


def test_criterion_7_ambiguity_demo():
    start = time.perf_counter()
    v1, v2, tau1, tau2 = 2.0, 4.0, 0.2, 0.1
    a, b = ambiguity_pair(None, (v1, v2), (tau1, tau2))
    assert np.array_equal(a.pixels, b.pixels)

    solved = solve_matching_tilt(v1, tau1, v2, tau2)
    a2, b2 = ambiguity_pair(solved + 1.0, (v1, v2), (tau1, tau2))
    assert not np.array_equal(a2.pixels, b2.pixels)

    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    _report(7, elapsed, 1, "default rod pair pixel-identical; 1 degree tilt breaks identity")


def test_criterion_8_format_round_trips(tmp_path, rng):
    start = time.perf_counter()
    for i in range(100):
        h = int(rng.integers(2, 24))
        w = int(rng.integers(2, 24))
        img = rng.random((h, w, 3 if i % 2 else 1)).astype(np.float32)
        path = tmp_path / f"img_{i}.pfm"
        write_pfm(path, img)
        assert np.array_equal(read_pfm(path), img)

        flow = FlowField(
            rng.standard_normal((h, w)).astype(np.float32),
            rng.standard_normal((h, w)).astype(np.float32),
        )
        fpath = tmp_path / f"flow_{i}.flo"
        write_flo(fpath, flow)
        back = read_flo(fpath)
        assert np.array_equal(back.u, flow.u) and np.array_equal(back.v, flow.v)
    elapsed = time.perf_counter() - start
    _report(8, elapsed, 0, "100 PFM and 100 .flo round-trips bit-identical")
