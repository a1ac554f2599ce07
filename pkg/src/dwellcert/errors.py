"""Exception hierarchy shared across the package."""


class DwellCertError(Exception):
    """Base class for all package-specific errors."""


class DimensionError(DwellCertError):
    """Matrix or vector arguments have incompatible or invalid shapes."""


class NumericalError(DwellCertError):
    """A numerical routine failed to converge or produced non-finite values."""


class NotPositiveDefiniteError(DwellCertError):
    """A matrix required to be symmetric positive definite is not."""


class SingularMatrixError(DwellCertError):
    """A linear solve hit a pivot below the singularity threshold."""


class ParseError(DwellCertError):
    """A serialized document could not be decoded.

    Carries ``line`` and ``column`` when the underlying decoder provides them.
    """

    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


class ValidationError(DwellCertError):
    """A parsed document or constructed value violates its invariants.

    ``subsystem_id`` and ``field`` identify the offending location when the
    error concerns one subsystem of a dataset.
    """

    def __init__(self, message, subsystem_id=None, field=None):
        super().__init__(message)
        self.subsystem_id = subsystem_id
        self.field = field


class AssumptionViolatedError(DwellCertError):
    """No trace window with linearly independent stacked-data columns exists.

    Reports the best independence ratio seen and the window offset where it
    occurred, so the caller can judge how close the data came.
    """

    def __init__(self, message, best_ratio=None, best_offset=None, subsystem_id=None):
        super().__init__(message)
        self.best_ratio = best_ratio
        self.best_offset = best_offset
        self.subsystem_id = subsystem_id


class InfeasibleGridError(DwellCertError):
    """No rate on the line-search grid is feasible for every subsystem."""


class GenerationError(DwellCertError):
    """Random generation exhausted its retry budget."""
