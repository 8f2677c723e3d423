"""Exception types raised across the package."""


class PhotonFlowError(Exception):
    """Base class for all package errors."""


class InvalidSpec(PhotonFlowError, ValueError):
    """A physical specification violates one of its invariants."""


class QuadratureNotConverged(PhotonFlowError, RuntimeError):
    """Adaptive panel refinement did not reach the requested tolerance."""


class NodalPoint(PhotonFlowError, FloatingPointError):
    """The energy density is below the nodal threshold; the flow velocity is undefined."""


class BackflowError(PhotonFlowError, RuntimeError):
    """The longitudinal energy flux S_y is not positive at a trajectory point."""


class EmptyEnsemble(PhotonFlowError, ValueError):
    """A histogram was requested for an ensemble with no usable endpoints."""


class NoExtrema(PhotonFlowError, ValueError):
    """A visibility window holds no interior local extremum to measure."""


class ParseError(PhotonFlowError, ValueError):
    """A configuration file could not be parsed."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class ValidationError(PhotonFlowError, ValueError):
    """A configuration parsed but violates a documented invariant."""
