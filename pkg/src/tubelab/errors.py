"""Exception types shared across the package."""


class TubelabError(Exception):
    """Base class for all errors raised by tubelab."""


class InvalidArgument(TubelabError, ValueError):
    pass


class InsufficientData(TubelabError, ValueError):
    pass


class ConsistencyError(TubelabError):
    """An internal identity that must hold exactly (or to tolerance) failed."""


class NearSingularBlock(TubelabError):
    pass


class FrameConstructionError(TubelabError):
    pass


class ChartDegenerate(TubelabError):
    """Complex angle recovery hit the pole of the spherical chart."""


class ResolutionError(TubelabError):
    """A quadrature did not converge when its resolution was doubled."""


class TruncationError(TubelabError):
    """A spectral sum could not be truncated below the window-tail threshold."""
