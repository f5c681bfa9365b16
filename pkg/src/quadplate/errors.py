"""Exception hierarchy.

Validation errors (bad geometry, bad case input) and numerical failures
(singular Jacobians, nonconvergence, ill-conditioning) are kept apart so
callers can map them to distinct exit codes.
"""


class QuadplateError(Exception):
    """Base class for all package errors."""


class ValidationError(QuadplateError):
    """Invalid input: geometry, mesh, or case description."""


class DegenerateGeometryError(ValidationError):
    """Geometry that cannot be meshed or mapped (zero area, bad indices, ...)."""


class InvalidCaseError(ValidationError):
    """Malformed or inconsistent case description."""


class NumericalError(QuadplateError):
    """Numerical failure: singular Jacobian, ill-conditioned system, ..."""


class NonconvergenceError(NumericalError):
    """Iteration failed to converge; carries the last residual seen."""

    def __init__(self, message, residual=None, theta=None):
        super().__init__(message)
        self.residual = residual
        self.theta = theta
