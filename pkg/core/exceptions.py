"""
Engine exceptions.

Everything the engine raises on purpose derives from ConcordanceError, so
the service layer and the management commands can tell data problems apart
from programming errors.
"""


class ConcordanceError(Exception):
    """Base class for all engine errors."""


class RingMismatchError(ConcordanceError):
    """Two polynomials over different coefficient rings were combined."""


class ZeroPolynomialError(ConcordanceError):
    """An operation that needs a nonzero polynomial received zero."""


class PreconditionError(ConcordanceError):
    """An argument violates the documented precondition of an operation."""


class InvalidSeifertMatrixError(ConcordanceError):
    """The matrix is not square of even size with det(V - V^T) = 1."""


class MalformedPDCodeError(ConcordanceError):
    """A planar diagram code could not be parsed or is inconsistent."""


class SingularFormError(ConcordanceError):
    """A linking form turned out to be singular during diagonalization."""


class SizeLimitError(ConcordanceError):
    """A computation would exceed a configured size limit."""

    def __init__(self, message, required=None, limit=None):
        super().__init__(message)
        self.required = required
        self.limit = limit


class InternalConsistencyError(ConcordanceError):
    """A postcondition that must hold mathematically failed."""


class KnotTableError(ConcordanceError):
    """A knot table file could not be loaded."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f'line {line}: {message}'
        super().__init__(message)
        self.line = line
