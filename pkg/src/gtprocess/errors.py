"""Exception hierarchy shared by all modules."""


class GTError(Exception):
    """Base class for every error raised by the library."""


class PoleError(GTError, ZeroDivisionError):
    """Evaluation point coincides with a pole (an atom or chi)."""


class DomainError(GTError, ValueError):
    """Arguments fall outside the domain of the requested map."""


class DegenerateError(GTError, ValueError):
    """Input is degenerate: coincident points, vanishing denominators."""


class NotInRegionError(GTError, ValueError):
    """Point does not belong to the region the inverse map needs."""


class NotInRError(GTError, ValueError):
    """Edge parameter is a non-isolated support point."""


class AmbiguousError(GTError, ValueError):
    """Two label conditions hold within the classification tolerance."""


class ConvergenceError(GTError, ArithmeticError):
    """An iterative solver failed to converge."""


class NonConvergedError(ConvergenceError):
    """Quadrature refinement did not reach the requested tolerance."""


class EpsTooLargeError(GTError, ValueError):
    """Sufficiency inequalities for the near-edge bounds fail."""


class SizeError(GTError, ValueError):
    """Problem size exceeds what the exact path supports."""


class ContourError(GTError, ValueError):
    """Contours violate their enclosure conditions."""


class GeometryError(GTError, ArithmeticError):
    """A constructed descent contour is geometrically invalid."""


class RootEscapeError(GTError, ArithmeticError):
    """A root left the neighbourhood it is guaranteed to stay in."""


class RejectionBudgetError(GTError, RuntimeError):
    """The rejection sampler exhausted its proposal budget."""


class EigensolverError(GTError, ArithmeticError):
    """The Hermitian eigensolver failed."""
