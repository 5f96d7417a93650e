"""Exception types shared across the package."""


class ArtifactError(Exception):
    """Base class for all errors raised by this package."""


class NonInvertibleBody(ArtifactError):
    """The rational body of a supermatrix is singular."""


class JacobiViolation(ArtifactError):
    """Structure constants fail the (graded) Jacobi identity."""


class MalformedSkeleton(ArtifactError):
    """A skeleton description is inconsistent."""


class UnknownEdge(ArtifactError):
    """An edge or half-edge id is not present in the skeleton."""


class IllegalSlide(ArtifactError):
    """The requested slide is not a valid move."""


class SameVertex(ArtifactError):
    """Fusion was requested for a vertex with itself."""


class NonClosedWord(ArtifactError):
    """A word that should be a closed loop is not closed."""


class NonComposablePath(ArtifactError):
    """Consecutive letters of a path do not share a vertex."""


class ProperPowerUnsupported(ArtifactError):
    """Realization of proper powers is not supported."""


class RetryExhausted(ArtifactError):
    """Random sampling gave up after too many rejected draws."""


class LogdetNotEvaluable(ArtifactError):
    """logdet atoms can only be differentiated, not evaluated."""


class UnknownSuite(ArtifactError):
    """The verification suite name is not recognised."""


class ParseError(ArtifactError):
    """Input text could not be parsed.

    ``position`` is the character offset of the problem when known.
    """

    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position
