"""Exception types shared across the package."""


class PassiradError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(PassiradError):
    """Input is outside the mathematical domain of the operation.

    Examples: dimension mismatch, non-finite entries, a certificate that
    is not positive definite, evaluation of a resolvent at a pole.
    """


class DefinitenessError(DomainError):
    """A matrix required to be positive definite is not.

    Carries the offending smallest eigenvalue in ``lambda_min``.
    """

    def __init__(self, message, lambda_min=None):
        super().__init__(message)
        self.lambda_min = lambda_min


class SpectralSplittingError(PassiradError):
    """The pencil spectrum cannot be split cleanly across the unit circle."""


class ConditioningError(PassiradError):
    """A subspace basis is too ill conditioned to invert reliably."""


class ConvergenceError(PassiradError):
    """An iteration hit its cap without meeting its termination test."""
