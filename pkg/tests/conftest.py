import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dualrs import CameraConfig, MotionModel, RsImage, render_rs_analytic
from dualrs import _kernels
from dualrs.textures import windowed_noise


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    """Compile the optional numba kernels once, outside any timed test."""
    _kernels.warmup()


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def make_scene(vx, vy, seed=0, size=64, smoothness=2.0, readout=1.0):
    """Textured scene translating by (vx, vy) px over the readout span.

    Returns (base, model, config, rs_t2b, rs_b2t).
    """
    base = windowed_noise(size, size, seed=seed, smoothness=smoothness)
    config = CameraConfig(rows=size, cols=size, readout=readout)
    model = MotionModel.translation(vx, vy)
    rs_t2b = render_rs_analytic(base, model, config, "t2b")
    rs_b2t = render_rs_analytic(base, model, config, "b2t")
    return base, model, config, rs_t2b, rs_b2t


def static_pair(seed=0, size=64):
    """Dual RS pair of a static scene (both equal the texture)."""
    base = windowed_noise(size, size, seed=seed)
    config = CameraConfig(rows=size, cols=size)
    return (
        base,
        config,
        RsImage(base, "t2b", config),
        RsImage(base, "b2t", config),
    )


def interior(img, border):
    """Crop a border band off every side."""
    if border <= 0:
        return img
    return img[border:-border, border:-border]
