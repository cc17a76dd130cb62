"""Exception types raised across the package."""


class AnnulusError(Exception):
    """Base class for all package errors."""


class DomainError(AnnulusError, ValueError):
    """A point or radius lies outside the region where an operation is defined."""


class PreconditionError(AnnulusError, ValueError):
    """Inputs violate a documented precondition of an operation."""


class TruncationInfeasibleError(AnnulusError):
    """The requested kernel tail tolerance cannot be met below the term cap."""


class ArcTooSmallError(AnnulusError, ValueError):
    """A boundary arc covers too few grid nodes to integrate over."""


class ZeroOnBoundaryError(AnnulusError, ValueError):
    """A function vanishes (to grid resolution) on one of the boundary circles."""


class HypothesisError(AnnulusError):
    """The smallness hypothesis of a logarithmic bound is not satisfied.

    Both exponents are kept so callers can report how far off they were.
    """

    def __init__(self, message, log_norm=None, threshold=None):
        super().__init__(message)
        self.log_norm = log_norm
        self.threshold = threshold


class SingularSystemError(AnnulusError):
    """The Galerkin system of the forward Robin solver is numerically singular."""


class VanishingTraceError(AnnulusError):
    """The inner trace of a solution vanishes, so the Robin identity cannot be inverted."""
