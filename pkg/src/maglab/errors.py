"""Exception hierarchy shared across the package."""


class MaglabError(Exception):
    """Base class for all package-specific errors."""


class ArgumentError(MaglabError, ValueError):
    """Invalid argument (nonpositive scale, bad shape parameters, ...)."""


class SolveError(MaglabError):
    """A linear solve failed or the system is numerically singular.

    Carries the condition-number estimate when one is available.
    """

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class ResonanceError(SolveError):
    """The boundary trace system is singular at this scale parameter.

    Such scales are candidate poles of the magnitude function; the offending
    value is recorded in ``scale``.
    """

    def __init__(self, message, scale, condition=None):
        super().__init__(message, condition=condition)
        self.scale = scale


class ResourceError(MaglabError):
    """A configurable resource cap (point count, subdivision depth) was hit."""


class MeshError(MaglabError):
    """Surface mesh is open, degenerate or inconsistently oriented."""


class ReconstructionError(MaglabError):
    """Rational least-squares fit did not reach the required residual."""


class PrecisionError(MaglabError):
    """A contour count failed to settle on an integer after refinement."""


class DiagnosticError(MaglabError):
    """Input data violates an assumption of a diagnostic routine."""
