"""Low-parameter scene motion models.

A motion model describes where scene content moves over one full readout
span (tH - t1). Evaluation at a time fraction s in [0, 1] is linear:
V(x, s) = s * V(x, 1), and fraction 0 always yields the zero field. Three
kinds are supported:

* translation: 2 params (dx, dy), the same displacement everywhere.
* affine: 6 params [a, b, c, d, e, f]; displacement is A @ [x, y, 1] - [x, y]
  with A = [[a, b, c], [d, e, f]], i.e. the affine map minus identity.
* dense: an explicit FlowField, passed through.

Models fitted by the corrector are persisted as plain-text key=value
records together with the camera geometry they were fitted against.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .camera import CameraConfig
from .errors import DomainError, FormatError, ShapeError
from .warp import FlowField

TRANSLATION = "translation"
AFFINE = "affine"
DENSE = "dense"


@dataclass
class MotionModel:
    """Scene displacement over the full readout span.

    `params` is a length-2 array (translation), length-6 array (affine),
    or a FlowField (dense).
    """

    kind: str
    params: np.ndarray | FlowField

    def __post_init__(self):
        if self.kind == TRANSLATION:
            self.params = np.asarray(self.params, dtype=np.float64).reshape(-1)
            if self.params.shape != (2,):
                raise DomainError(f"translation expects 2 params, got {self.params.shape}")
        elif self.kind == AFFINE:
            self.params = np.asarray(self.params, dtype=np.float64).reshape(-1)
            if self.params.shape != (6,):
                raise DomainError(f"affine expects 6 params, got {self.params.shape}")
        elif self.kind == DENSE:
            if not isinstance(self.params, FlowField):
                raise DomainError("dense motion expects a FlowField")
        else:
            raise DomainError(f"unknown motion kind {self.kind!r}")

    @classmethod
    def zero(cls) -> "MotionModel":
        return cls(TRANSLATION, np.zeros(2))

    @classmethod
    def translation(cls, dx: float, dy: float) -> "MotionModel":
        return cls(TRANSLATION, np.array([dx, dy], dtype=np.float64))

    @classmethod
    def affine(cls, params) -> "MotionModel":
        return cls(AFFINE, np.asarray(params, dtype=np.float64))


def evaluate_motion(model: MotionModel, width: int, height: int) -> FlowField:
    """Densify a motion model over a (height x width) pixel grid.

    The result is the displacement of every pixel over the full readout
    span; scale it by a time fraction to get motion up to that instant.
    """
    if model.kind == TRANSLATION:
        dx, dy = model.params
        return FlowField.constant(height, width, dx, dy)
    if model.kind == AFFINE:
        a, b, c, d, e, f = model.params
        ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
        u = a * xs + b * ys + c - xs
        v = d * xs + e * ys + f - ys
        return FlowField(u, v)
    field = model.params
    if field.shape != (height, width):
        raise ShapeError(
            f"dense motion field is {field.shape}, expected {(height, width)}"
        )
    return FlowField(field.u.copy(), field.v.copy())


def model_from_params(kind: str, params: np.ndarray) -> MotionModel:
    """Rebuild a model from a flat optimizer parameter vector."""
    if kind not in (TRANSLATION, AFFINE):
        raise DomainError(f"cannot fit motion kind {kind!r}")
    return MotionModel(kind, np.asarray(params, dtype=np.float64))


def initial_params(model: MotionModel) -> np.ndarray:
    """Flat parameter vector for the optimizer; rejects dense models."""
    if model.kind == DENSE:
        raise DomainError("dense motion models have no flat parameter vector")
    return np.asarray(model.params, dtype=np.float64).copy()


def save_motion_model(path: str | Path, model: MotionModel, config: CameraConfig) -> None:
    """Write a plain-text key=value record of a fitted model.

    Floats are written with repr so the record round-trips bit-exactly.
    Dense models have no compact textual form and are rejected.
    """
    if model.kind == DENSE:
        raise DomainError("dense motion models are not representable as records")
    lines = [
        f"kind={model.kind}",
        "params=" + ",".join(repr(float(p)) for p in model.params),
        f"rows={config.rows}",
        f"cols={config.cols}",
        f"readout={config.readout!r}",
        f"midpoint={config.midpoint!r}",
    ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def load_motion_model(path: str | Path) -> tuple[MotionModel, CameraConfig]:
    """Read back a record written by save_motion_model."""
    fields: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="ascii").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise FormatError(f"{path}: line {lineno} is not a key=value record")
        key, value = line.split("=", 1)
        fields[key.strip()] = value.strip()
    try:
        model = MotionModel(fields["kind"], [float(p) for p in fields["params"].split(",")])
        config = CameraConfig(
            rows=int(fields["rows"]),
            cols=int(fields["cols"]),
            readout=float(fields["readout"]),
            midpoint=float(fields.get("midpoint", "0.0")),
        )
    except KeyError as exc:
        raise FormatError(f"{path}: missing field {exc}") from None
    return model, config
