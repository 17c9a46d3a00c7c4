"""Exception types raised by grassgeo."""


class GeometryError(ValueError):
    """Base class for domain errors."""


class DegenerateForm(GeometryError):
    """A hermitian form (or Gram matrix) is singular."""


class DegeneratePoint(GeometryError):
    """A subspace is degenerate, or has no nonisotropic pivot."""


class NotGeneric(GeometryError):
    """A tangent vector falls outside the generic geodesic case."""

    def __init__(self, reason: str):
        super().__init__(f"NotGeneric: {reason}")
        self.reason = reason


class InfeasibleGram(GeometryError):
    """A Gram matrix cannot be realized in signature (4, 1)."""
