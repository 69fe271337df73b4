"""Exception types shared across the toolkit."""


class RisoptError(Exception):
    """Base class for all toolkit errors."""


class DomainError(RisoptError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class ConfigurationError(RisoptError, ValueError):
    """A scene or run configuration is inconsistent or unusable."""


class MatrixFormatError(RisoptError, ValueError):
    """An impedance-matrix file is malformed or violates reciprocity."""


class SingularNetworkError(RisoptError, RuntimeError):
    """The loaded network matrix is singular or too ill-conditioned to solve."""

    def __init__(self, message, condition_estimate=None):
        super().__init__(message)
        self.condition_estimate = condition_estimate


class NonPhysicalError(RisoptError, RuntimeError):
    """A computed quantity violates basic physics (e.g. non-positive drive power)."""


class InvalidTerminationError(RisoptError, ValueError):
    """A source/receiver termination has a non-positive real part."""


class InfeasibleProblemError(RisoptError, RuntimeError):
    """The SDP is infeasible or unbounded; carries the solver certificate kind."""

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class SolverConvergenceError(RisoptError, RuntimeError):
    """The SDP solver stopped without an optimal solution or a certificate."""

    def __init__(self, message, iterations=None, gap=None):
        super().__init__(message)
        self.iterations = iterations
        self.gap = gap


class NotTightError(RisoptError, RuntimeError):
    """The semidefinite relaxation is not rank-1; carries the eigenvalue ratio."""

    def __init__(self, message, ratio=None):
        super().__init__(message)
        self.ratio = ratio


class DegenerateSolutionError(RisoptError, RuntimeError):
    """An SDP solution has no positive leading eigenvalue."""


class ComplexityError(RisoptError, ValueError):
    """A brute-force request exceeds the supported problem size."""


class GateRangeError(RisoptError, ValueError):
    """A time gate does not fit inside the unambiguous time span."""


class ValidityWarning(UserWarning):
    """A result was produced outside the validated range of the model."""
