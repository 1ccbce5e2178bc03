"""Exception hierarchy shared by all backends and drivers.

Every error message names the operation that raised it and the offending
element, so batch runs can report failures without a debugger.
"""


class GeodesicError(Exception):
    """Base class for all library errors."""


class MixedBackends(GeodesicError):
    """Points from different backends were combined in one operation."""


class InvalidPoint(GeodesicError):
    """Point coordinates violate the owning backend's invariants."""


class InvalidCurve(GeodesicError):
    """PolyCurve violates a structural invariant (size, tags, gaps)."""


class GapTooWide(InvalidCurve):
    """A consecutive sample gap reaches the backend's uniqueness radius."""


class TooFar(GeodesicError):
    """Endpoints exceed the uniqueness radius; the caller must subdivide."""


class NotUnique(GeodesicError):
    """Two shortest paths tie within tolerance (cut locus hit)."""


class OutsideDisk(GeodesicError):
    """Foliation base parameters lie outside the closed unit disk."""


class ContinuityViolation(GeodesicError):
    """Adjacent sweep-family samples are farther apart than epsilon/2."""


class CannotSatisfy(GeodesicError):
    """No admissible arc count below the configured cap."""


class DiameterViolation(GeodesicError):
    """Some parameter window of width 1/k has diameter >= epsilon/2."""


class WindowTooWide(GeodesicError):
    """Certification window spans an arc longer than epsilon."""


class FamilyCollapsed(GeodesicError):
    """Every sweep-family curve dropped below epsilon: the family was
    null-homotopic or the discretization too coarse."""

    def __init__(self, iteration: int):
        self.iteration = iteration
        super().__init__(
            f"minimax_run: every family curve is shorter than epsilon at "
            f"iteration {iteration}; the sweep-out carries no width"
        )


class NoneConverged(GeodesicError):
    """No systole seed produced a converged limit."""


class NoConvergence(GeodesicError):
    """Mesh path straightening hit its iteration cap."""


class ParseError(GeodesicError):
    """Malformed input file (OBJ, curve JSON, or config)."""


class NonManifold(GeodesicError):
    """Mesh has an edge or vertex whose neighborhood is not disk-like."""


class Disconnected(GeodesicError):
    """Mesh has more than one connected component."""


class DegenerateFace(GeodesicError):
    """Mesh face with (near-)zero area."""
