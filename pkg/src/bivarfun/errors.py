"""Exception and warning classes."""


class BivarfunError(Exception):
    """Base class for all package errors."""


class SizeLimitError(BivarfunError):
    """An explicit Kronecker-form matrix would exceed the configured cap."""


class SolverError(BivarfunError):
    """An iterative or direct solver failed to produce an acceptable answer."""


class SingularMatrixError(SolverError):
    def __init__(self, msg, pivot):
        super().__init__(f"{msg} (smallest pivot magnitude {pivot:.3e})")
        self.pivot = pivot


class ExpressionSyntaxError(BivarfunError):
    def __init__(self, msg, offset):
        super().__init__(f"{msg} at offset {offset}")
        self.offset = offset


class EvaluationDomainError(BivarfunError):
    """Division by zero, or log/sqrt evaluated at zero."""

    def __init__(self, msg, node=None):
        super().__init__(msg)
        self.node = node


class AnalyticityError(BivarfunError):
    """The analyticity probe rejected a function/contour combination."""


class OracleUnavailableError(BivarfunError):
    """An oracle requiring an eigenbasis was called on a (numerically)
    defective matrix."""


class AccuracyWarning(UserWarning):
    """Quadrature did not reach the requested tolerance."""
