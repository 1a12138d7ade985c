"""Exception types raised by the estimators and the benchmark harness."""


class ZoestError(Exception):
    """Base class for all package errors."""


class ParameterError(ZoestError, ValueError):
    """An argument violates an estimator or sampler precondition."""


class SamplingError(ZoestError, RuntimeError):
    """Random direction generation failed after the retry budget."""


class SingularMatrixError(ZoestError, ArithmeticError):
    """A Gram matrix is too ill-conditioned to take its inverse square root."""


class EvaluationError(ZoestError, ArithmeticError):
    """The objective returned a non-finite value.

    The offending point is kept on ``point`` so callers can report it.
    """

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point
