"""Exception hierarchy shared by all modules."""


class RHSError(Exception):
    """Base class for every error raised by the package."""


class InvalidIntervalError(RHSError, ValueError):
    pass


class InvalidParameterError(RHSError, ValueError):
    pass


class DomainError(RHSError, ValueError):
    pass


class ClassViolationError(DomainError, TypeError):
    """A test function is not in the class an operation requires."""


class CapabilityError(RHSError):
    """Requested derivative order exceeds what a jet oracle can deliver."""


class ConfigError(RHSError, ValueError):
    pass


class AccuracyError(RHSError):
    """Numerical procedure did not reach the requested tolerance."""

    def __init__(self, message, value=None, achieved=None):
        super().__init__(message)
        self.value = value
        self.achieved = achieved


class EvaluationError(RHSError, FloatingPointError):
    """Integrand produced a non-finite value."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class PoleError(RHSError, ZeroDivisionError):
    """Evaluation requested at (or numerically too close to) a pole.

    ``residue`` holds the residue at the offending pole when it is known,
    ``index`` the pole label (``k`` for ``lambda = -k``, ``n`` for ``E_n``).
    """

    def __init__(self, message, index=None, residue=None):
        super().__init__(message)
        self.index = index
        self.residue = residue
