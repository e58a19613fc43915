"""Exception types shared across the library.

Everything derives from DualRsError so callers (and the CLI) can catch one
base class. Subclasses distinguish the failure modes the API contracts name:
shape mismatches, degenerate camera geometry, timing disagreements, bad
file formats, and so on.
"""


class DualRsError(Exception):
    """Base class for all library errors."""


class ShapeError(DualRsError, ValueError):
    """Array dimensions disagree with what an operation requires."""


class DomainError(DualRsError, ValueError):
    """A parameter is outside its valid domain (row index, sigma, range)."""


class DegenerateGeometryError(DualRsError, ValueError):
    """Camera geometry with no defined readout span (fewer than 2 rows)."""


class DegenerateSegmentError(DualRsError, ValueError):
    """Intermediate split row outside the range the time maps can serve."""


class DegenerateCropError(DualRsError, ValueError):
    """Boundary crop so large that no usable center region remains."""


class TimingError(DualRsError, ValueError):
    """Frame timestamps do not match the camera's row readout schedule."""


class FormatError(DualRsError, ValueError):
    """A serialized file (PFM, .flo, model record) is malformed."""


class NonFiniteObjectiveError(DualRsError, ArithmeticError):
    """The fitting objective produced NaN or infinity; the fit aborts."""


class UnsatisfiableParametersError(DualRsError, ValueError):
    """Requested ambiguity-demo parameters admit no matching construction."""
