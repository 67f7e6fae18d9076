"""Exception types shared across the package."""

__all__ = [
    "SpectroidError",
    "DomainMismatch",
    "DependentChannels",
    "BoundaryOrExteriorResponse",
    "NotEstimable",
    "MaxIterationsExceeded",
    "NonPositiveCombination",
    "UnsupportedDimension",
]


class SpectroidError(Exception):
    """Base class for all package-specific errors."""


class DomainMismatch(SpectroidError):
    """Two step functions do not share the same domain interval."""


class DependentChannels(SpectroidError):
    """The responsivity channels are linearly dependent (Gram rank test)."""


class BoundaryOrExteriorResponse(SpectroidError):
    """The response lies on or outside the boundary of the feasible zonotope."""


class NotEstimable(SpectroidError):
    """Unbounded regime: the response is outside the image of the feasibility cone."""


class MaxIterationsExceeded(SpectroidError):
    """The Newton solver did not converge within the iteration budget."""


class NonPositiveCombination(SpectroidError):
    """The requested linear combination of channels is not strictly positive."""


class UnsupportedDimension(SpectroidError):
    """Exact zonotope membership is only implemented for m <= 3."""
