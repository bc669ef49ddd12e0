"""Exception hierarchy shared by the hemiray modules."""


class HemirayError(Exception):
    """Base class for all library errors."""


class ValidationError(HemirayError, ValueError):
    """An argument violates a documented precondition."""


class DegenerateInputError(ValidationError):
    """Input sits on a singular configuration (e.g. conjugate points)."""


class InfeasibleSceneError(HemirayError):
    """The source point cannot be separated from the domain."""


class DivergenceError(HemirayError, ArithmeticError):
    """An iterative reconstruction stopped contracting."""

    def __init__(self, message, weight_deviation=None, history=None):
        super().__init__(message)
        self.weight_deviation = weight_deviation
        self.history = list(history or [])


class CalibrationError(HemirayError):
    """A fitted constant does not explain the data well enough."""


class ResolutionError(HemirayError):
    """The discretisation is too coarse for the requested computation."""

    def __init__(self, message, required=None):
        super().__init__(message)
        self.required = required
