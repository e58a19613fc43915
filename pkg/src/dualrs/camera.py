"""Rolling-shutter camera timing bookkeeping.

A rolling-shutter sensor exposes one row per readout instant. With H rows
there are H-1 readout intervals of length `readout` seconds, and the
acquisition time of the whole image is defined as the midpoint of the
exposure period, so the first and last rows are read at

    t1 = midpoint - readout * (H - 1) / 2
    tH = midpoint + readout * (H - 1) / 2

Scan direction decides which physical row is read at which instant:
top-to-bottom reads physical row i at instant i, bottom-to-top reads
physical row i at instant H - i + 1. All images in this library are stored
in physical row coordinates (row r is the scene's row r in both captures),
so a static scene produces identical dual images.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometryError, DomainError


class ScanDirection(str, enum.Enum):
    """Row scan order of a rolling-shutter capture."""

    T2B = "t2b"
    B2T = "b2t"

    @classmethod
    def parse(cls, value: "ScanDirection | str") -> "ScanDirection":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise DomainError(f"unknown scan direction {value!r}") from None


@dataclass(frozen=True)
class CameraConfig:
    """Geometry and timing of a rolling-shutter capture.

    Attributes:
        rows: image height H. Must be >= 2 (H = 1 has no readout span and
            every (H - 1) denominator in the timing maps is undefined).
        cols: image width W.
        readout: seconds between consecutive row exposures (tau > 0).
        midpoint: acquisition time t, the midpoint of the exposure period.
    """

    rows: int
    cols: int
    readout: float = 1.0
    midpoint: float = 0.0

    def __post_init__(self):
        if self.rows < 2:
            raise DegenerateGeometryError(
                f"rolling shutter needs at least 2 rows, got {self.rows}"
            )
        if self.cols < 1:
            raise DomainError(f"image width must be positive, got {self.cols}")
        if not self.readout > 0:
            raise DomainError(f"readout must be > 0 seconds, got {self.readout}")

    @property
    def span(self) -> float:
        """Full readout span tH - t1 in seconds."""
        return self.readout * (self.rows - 1)

    @property
    def start_time(self) -> float:
        return self.midpoint - 0.5 * self.span

    @property
    def end_time(self) -> float:
        return self.midpoint + 0.5 * self.span

    def row_time(self, instant: int) -> float:
        """Exposure time of readout instant `instant` (1-based)."""
        self._check_row(instant)
        return self.start_time + (instant - 1) * self.readout

    def row_times(self) -> np.ndarray:
        """All H readout times, in scan order."""
        return self.start_time + np.arange(self.rows) * self.readout

    def scan_instant(self, row: int, direction: ScanDirection | str) -> int:
        """Readout instant (1-based) at which physical `row` is exposed."""
        self._check_row(row)
        if ScanDirection.parse(direction) is ScanDirection.T2B:
            return row
        return self.rows - row + 1

    def scan_fractions(self, direction: ScanDirection | str) -> np.ndarray:
        """Normalized readout time in [0, 1] of each physical row.

        Fraction 0 is t1, fraction 1 is tH. For t2b this increases down the
        image; for b2t it decreases.
        """
        idx = np.arange(self.rows, dtype=np.float64)
        if ScanDirection.parse(direction) is ScanDirection.T2B:
            return idx / (self.rows - 1)
        return (self.rows - 1 - idx) / (self.rows - 1)

    def _check_row(self, row: int) -> None:
        if not 1 <= row <= self.rows:
            raise DomainError(f"row {row} outside [1..{self.rows}]")
