"""Exception types shared across the package."""


class FacepathError(Exception):
    """Base class for all domain errors."""


class ParseError(FacepathError):
    """Scene file is not well-formed."""


class ValidationError(FacepathError):
    """Scene content is structurally invalid (bad index, degenerate triangle, ...)."""


class DegenerateGeometry(FacepathError):
    """An operation received geometry it cannot handle (zero-area triangle, zero-length segment)."""


class OffPlane(FacepathError):
    """Point handed to a planar classification does not lie on the plane."""


class BadFaceRef(FacepathError):
    """Face reference does not resolve to an existing triangle."""


class SourceInsideObstacle(FacepathError):
    """Query source lies strictly inside a closed obstacle."""


class Unreachable(FacepathError):
    """No obstacle-avoiding path exists in the constructed graph."""


class Blocked(FacepathError):
    """Closed-form oracle precondition failed: the direct segment is blocked."""


class Infeasible(FacepathError):
    """Unfolded path leaves its edge sequence or crosses an obstacle."""


class NoFeasibleSequence(FacepathError):
    """Exhaustive oracle found no feasible candidate path."""
