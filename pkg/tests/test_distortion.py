import numpy as np
import pytest

from dualrs import (
    CameraConfig,
    DegenerateGeometryError,
    DegenerateSegmentError,
    DomainError,
    FlowField,
    MotionModel,
    anchor_and_complementary_flows,
    cfr_reverse,
    distortion_time_map,
    evaluate_motion,
    psnr,
    reconstruct_rs_endpoints,
    reconstruct_rs_intermediate,
    render_gs_at,
    render_rs_analytic,
    time_mask,
)
from dualrs.textures import windowed_noise

from conftest import interior
from oracles import brute_cfr_holes


class TestDistortionTimeMap:
    def test_s2e_three_rows(self):
        assert np.allclose(distortion_time_map(3, "s2e"), [0.0, 0.5, 1.0])

    def test_s2m_split_at_three(self):
        assert np.allclose(distortion_time_map(5, "s2m", 3), [0.0, 0.5, 1.0, 1.0, 1.0])

    def test_m2e_split_at_three(self):
        assert np.allclose(distortion_time_map(5, "m2e", 3), [0.0, 0.0, 0.0, 0.0, 1.0])

    def test_complement_identity_exhaustive(self):
        for rows in range(2, 66):
            s2e = distortion_time_map(rows, "s2e")
            e2s = distortion_time_map(rows, "e2s")
            assert np.array_equal(s2e + e2s, np.ones(rows))
            assert np.all(np.diff(s2e) >= 0)

    def test_s2m_degenerate_first_row(self):
        assert np.allclose(distortion_time_map(4, "s2m", 1), [0.0, 1.0, 1.0, 1.0])

    def test_m2e_penultimate_split_takes_limit(self):
        assert np.allclose(distortion_time_map(4, "m2e", 3), [0.0, 0.0, 0.0, 1.0])

    def test_m2e_at_last_row_rejected(self):
        with pytest.raises(DegenerateGeometryError):
            distortion_time_map(4, "m2e", 4)

    def test_m_required_and_ranged(self):
        with pytest.raises(DomainError):
            distortion_time_map(4, "s2m")
        with pytest.raises(DomainError):
            distortion_time_map(4, "s2m", 5)
        with pytest.raises(DomainError):
            distortion_time_map(4, "nope")
        with pytest.raises(DegenerateGeometryError):
            distortion_time_map(1, "s2e")


class TestTimeMask:
    def test_t2b_examples(self):
        assert np.array_equal(time_mask(5, 3, "t2b"), [1, 1, 1, 0, 0])
        assert np.array_equal(time_mask(5, 5, "t2b"), np.ones(5))

    def test_b2t_row_reversed(self):
        assert np.array_equal(time_mask(5, 3, "b2t"), [0, 0, 1, 1, 1])

    def test_partition_exhaustive(self):
        for rows in range(2, 66):
            for m in range(1, rows + 1):
                u = time_mask(rows, m, "t2b")
                assert np.array_equal(u + (1 - u), np.ones(rows))
                assert u.sum() == m
                assert np.array_equal(time_mask(rows, m, "b2t"), u[::-1])

    def test_range_checked(self):
        with pytest.raises(DomainError):
            time_mask(5, 0, "t2b")
        with pytest.raises(DomainError):
            time_mask(5, 6, "t2b")


class TestAnchorComplementaryFlows:
    def test_paper_values_three_rows(self):
        fwd = FlowField.constant(3, 4, 2.0, 0.0)
        bwd = FlowField.constant(3, 4, -2.0, 0.0)
        t = distortion_time_map(3, "s2e")
        a_fwd, a_bwd, c_fwd, c_bwd = anchor_and_complementary_flows(fwd, bwd, t)
        assert np.allclose(a_fwd.u[:, 0], [0.0, 1.0, 2.0])
        assert np.allclose(c_bwd.u[:, 0], [0.0, -1.0, -2.0])
        assert np.allclose(a_bwd.u[:, 0], [-2.0, -1.0, 0.0])
        assert np.allclose(c_fwd.u[:, 0], [2.0, 1.0, 0.0])

    def test_zero_time_rows_zero_anchor(self, rng):
        fwd = FlowField(
            rng.random((4, 4)).astype(np.float32), rng.random((4, 4)).astype(np.float32)
        )
        bwd = fwd.negated()
        t = distortion_time_map(4, "s2e")
        a_fwd, _, _, _ = anchor_and_complementary_flows(fwd, bwd, t)
        assert np.all(a_fwd.u[0] == 0.0) and np.all(a_fwd.v[0] == 0.0)

    def test_shape_mismatch(self):
        with pytest.raises(Exception):
            anchor_and_complementary_flows(
                FlowField.zero(3, 3), FlowField.zero(4, 4), np.zeros(3)
            )


class TestCfrReverse:
    @pytest.mark.parametrize("rows", [8, 64])
    @pytest.mark.parametrize("v", [1.0, 2.0, 3.5])
    def test_constant_flow_closed_form(self, rows, v):
        fwd = FlowField.constant(rows, rows, v, 0.0)
        bwd = FlowField.constant(rows, rows, -v, 0.0)
        t = distortion_time_map(rows, "s2e")
        rev_fwd, rev_bwd = cfr_reverse(fwd, bwd, t)
        expect_fwd = -t[:, None] * v
        expect_bwd = (1.0 - t)[:, None] * v
        keep = ~rev_fwd.hole_mask
        assert np.abs(rev_fwd.u - expect_fwd)[keep].max() < 1e-6
        assert np.abs(rev_bwd.u - expect_bwd)[keep].max() < 1e-6
        assert np.abs(rev_fwd.v).max() == 0.0 and np.abs(rev_bwd.v).max() == 0.0
        # holes carry the fallback, which equals the closed form too
        assert np.abs(rev_fwd.u - expect_fwd).max() < 1e-6

    @pytest.mark.parametrize("rows", [8, 64])
    @pytest.mark.parametrize("v", [1.0, 2.0, 3.5])
    def test_hole_set_matches_brute_oracle(self, rows, v):
        fwd = FlowField.constant(rows, rows, v, 0.0)
        bwd = FlowField.constant(rows, rows, -v, 0.0)
        t = distortion_time_map(rows, "s2e")
        rev_fwd, rev_bwd = cfr_reverse(fwd, bwd, t)
        oracle = brute_cfr_holes(fwd, bwd, t)
        assert np.array_equal(rev_fwd.hole_mask, oracle)
        assert np.array_equal(rev_bwd.hole_mask, oracle)

    def test_zero_flow_zero_output_no_holes(self):
        fwd = FlowField.zero(6, 6)
        rev_fwd, rev_bwd = cfr_reverse(fwd, fwd, distortion_time_map(6, "s2e"))
        assert not rev_fwd.hole_mask.any()
        assert np.all(rev_fwd.u == 0.0) and np.all(rev_bwd.u == 0.0)

    def test_both_flows_rightward_leaves_left_holes_with_fallback(self):
        # a deliberately inconsistent pair: both flows push right, so the
        # left columns of interior rows receive no splat mass at all
        rows = 8
        fwd = FlowField.constant(rows, rows, 3.0, 0.0)
        bwd = FlowField.constant(rows, rows, 3.0, 0.0)
        t = distortion_time_map(rows, "s2e")
        rev_fwd, _ = cfr_reverse(fwd, bwd, t)
        oracle = brute_cfr_holes(fwd, bwd, t)
        assert np.array_equal(rev_fwd.hole_mask, oracle)
        assert oracle[3, 0]  # interior-row left edge is a hole
        filled = np.broadcast_to(-t[:, None] * 3.0, oracle.shape)
        assert np.abs(rev_fwd.u[oracle] - filled[oracle]).max() < 1e-6

    def test_random_flows_hole_oracle(self, rng):
        rows = 12
        fwd = FlowField(
            (rng.random((rows, rows)) * 8 - 4).astype(np.float32),
            (rng.random((rows, rows)) * 2 - 1).astype(np.float32),
        )
        bwd = FlowField(
            (rng.random((rows, rows)) * 8 - 4).astype(np.float32),
            (rng.random((rows, rows)) * 2 - 1).astype(np.float32),
        )
        t = distortion_time_map(rows, "s2e")
        rev_fwd, _ = cfr_reverse(fwd, bwd, t)
        assert np.array_equal(rev_fwd.hole_mask, brute_cfr_holes(fwd, bwd, t))


def _gs_frames_and_flows(base, model, config, fraction_mid=None):
    vel = evaluate_motion(model, config.cols, config.rows)
    gs_start = render_gs_at(base, model, 0.0)
    gs_end = render_gs_at(base, model, 1.0)
    if fraction_mid is None:
        return gs_start, gs_end, vel
    gs_mid = render_gs_at(base, model, fraction_mid)
    return gs_start, gs_mid, gs_end, vel


class TestReconstructEndpoints:
    def test_static_scene_exact(self, rng):
        img = rng.random((12, 12, 1)).astype(np.float32)
        zero = FlowField.zero(12, 12)
        out = reconstruct_rs_endpoints(img, img, zero, zero, "t2b")
        assert np.abs(out.pixels - img).max() < 1e-6
        assert not out.hole_mask.any()

    @pytest.mark.parametrize("direction", ["t2b", "b2t"])
    def test_translation_matches_analytic_render(self, direction):
        size = 64
        base = windowed_noise(size, size, seed=21, smoothness=3.0)
        config = CameraConfig(rows=size, cols=size)
        model = MotionModel.translation(2.0, 0.0)
        gs_start, gs_end, vel = _gs_frames_and_flows(base, model, config)
        recon = reconstruct_rs_endpoints(
            gs_start, gs_end, vel, vel.negated(), direction, config=config
        )
        ref = render_rs_analytic(base, model, config, direction)
        band = 2
        err = np.abs(recon.pixels - ref.pixels)[band:-band, band:-band]
        assert err.max() < 1e-4
        assert psnr(interior(recon.pixels, band), interior(ref.pixels, band)) > 40.0

    def test_shape_checks(self, rng):
        img = rng.random((6, 6, 1)).astype(np.float32)
        with pytest.raises(Exception):
            reconstruct_rs_endpoints(img, img[:4], FlowField.zero(6, 6), FlowField.zero(6, 6), "t2b")


class TestReconstructIntermediate:
    def test_static_scene_exact_every_split(self, rng):
        img = rng.random((10, 10, 1)).astype(np.float32)
        zero = FlowField.zero(10, 10)
        for m in (1, 2, 5, 9, 10):
            out = reconstruct_rs_intermediate(
                img, img, img, (zero, zero), (zero, zero), m, "t2b"
            )
            assert np.abs(out.pixels - img).max() < 1e-6

    @staticmethod
    def _reconstruct_midsplit(base, model, config, m, direction):
        size = config.rows
        gs_start, gs_mid, gs_end, vel = _gs_frames_and_flows(
            base, model, config, fraction_mid=(m - 1) / (size - 1)
        )
        seg_sm = vel.scaled((m - 1) / (size - 1))
        seg_me = vel.scaled((size - m) / (size - 1))
        return reconstruct_rs_intermediate(
            gs_start,
            gs_mid,
            gs_end,
            (seg_sm, seg_sm.negated()),
            (seg_me, seg_me.negated()),
            m,
            direction,
            config=config,
        )

    @pytest.mark.parametrize("direction", ["t2b", "b2t"])
    def test_translation_max_error_on_gentle_scene(self, direction):
        # 1e-4 max error needs a scene whose cascaded bilinear samples are
        # near exact: a gentle ramp plus a whisper of smooth noise
        size = 64
        ys, xs = np.mgrid[0:size, 0:size].astype(np.float32)
        ramp = 0.3 + 0.4 * (xs + 0.3 * ys) / (size + 0.3 * size)
        noise = (windowed_noise(size, size, seed=22, smoothness=3.0)[..., 0] - 0.5) * 0.006
        base = (ramp + noise)[..., None].astype(np.float32)
        config = CameraConfig(rows=size, cols=size)
        model = MotionModel.translation(1.0, 0.0)
        recon = self._reconstruct_midsplit(base, model, config, size // 2, direction)
        ref = render_rs_analytic(base, model, config, direction)
        err = np.abs(recon.pixels - ref.pixels)[2:-2, 2:-2]
        assert err.max() < 1e-4

    @pytest.mark.parametrize("direction", ["t2b", "b2t"])
    def test_translation_psnr_on_textured_scene(self, direction):
        size = 64
        base = windowed_noise(size, size, seed=22, smoothness=3.0)
        config = CameraConfig(rows=size, cols=size)
        model = MotionModel.translation(2.0, 0.0)
        recon = self._reconstruct_midsplit(base, model, config, size // 2, direction)
        ref = render_rs_analytic(base, model, config, direction)
        band = 2
        assert psnr(interior(recon.pixels, band), interior(ref.pixels, band)) > 40.0

    def test_mask_locality_rows_ignore_far_segment(self, rng):
        size = 16
        img = rng.random((size, size, 1)).astype(np.float32)
        other = rng.random((size, size, 1)).astype(np.float32)
        zero = FlowField.zero(size, size)
        m = 7
        base_out = reconstruct_rs_intermediate(
            img, img, img, (zero, zero), (zero, zero), m, "t2b"
        )
        perturbed = reconstruct_rs_intermediate(
            img, img, other, (zero, zero), (zero, zero), m, "t2b"
        )
        assert np.array_equal(base_out.pixels[:m], perturbed.pixels[:m])
        assert not np.array_equal(base_out.pixels[m:], perturbed.pixels[m:])

    def test_split_out_of_range(self, rng):
        img = rng.random((8, 8, 1)).astype(np.float32)
        zero = FlowField.zero(8, 8)
        with pytest.raises(DegenerateSegmentError):
            reconstruct_rs_intermediate(img, img, img, (zero, zero), (zero, zero), 0, "t2b")
        with pytest.raises(DegenerateSegmentError):
            reconstruct_rs_intermediate(img, img, img, (zero, zero), (zero, zero), 9, "t2b")
