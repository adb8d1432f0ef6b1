"""Exception types raised across the library."""


class SpecbillError(Exception):
    """Base class for numerical failures (CLI exit status 3)."""


class ComponentsIntersect(SpecbillError):
    pass


class NoGraphChart(SpecbillError):
    pass


class OutOfChart(SpecbillError):
    pass


class DiagonalSingularity(SpecbillError):
    pass


class NoConvergence(SpecbillError):
    pass


class CollapsedLink(SpecbillError):
    pass


class NotHyperbolic(SpecbillError):
    pass


class SpectralMismatch(SpecbillError):
    pass


class Degenerate(SpecbillError):
    pass


class MissingCoefficient(SpecbillError):
    pass


class SingularSystem(SpecbillError):
    pass


class OddObstruction(SpecbillError):
    pass


class NegativeSquare(SpecbillError):
    pass


class OriginSingularity(SpecbillError):
    pass


class PhaseJump(SpecbillError):
    pass


class WindowTooNarrow(SpecbillError):
    pass


class EvenSymmetry(UserWarning):
    """Odd Taylor data is invisible to the table; odd orders were set to zero."""


class IllConditioned(SpecbillError):
    """Operator entries beyond the magnitude cap (too deep in the lower half-plane)."""
