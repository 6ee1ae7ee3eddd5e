"""Exception hierarchy shared by all antijam modules."""


class AntijamError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(AntijamError, ValueError):
    pass


class DimensionError(ValidationError):
    pass


class SymmetryError(ValidationError):
    pass


class ConvergenceError(AntijamError, ArithmeticError):
    pass


class ConditioningError(AntijamError, ArithmeticError):
    pass


class DegenerateGeometryError(AntijamError, ValueError):
    pass


class SubspaceError(ValidationError):
    pass


class CollinearityError(AntijamError, ArithmeticError):
    pass


class ColdStartError(AntijamError, LookupError):
    """Raised when the predictor has too little history to forecast."""


class BoundsError(AntijamError, IndexError):
    pass


class RunError(AntijamError):
    """A mitigation run aborted; carries the failing collection index."""

    def __init__(self, t_index, cause):
        self.t_index = t_index
        self.cause = cause
        super().__init__(f"collection {t_index}: {type(cause).__name__}: {cause}")
