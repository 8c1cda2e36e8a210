"""Exception types raised across the package."""


class NLSFVError(Exception):
    """Base class for all package errors."""


class DegenerateGeometryError(NLSFVError):
    """A cell or face collapsed (zero area, coincident points, zero distance)."""


class SeedingError(NLSFVError):
    """Random generators could not be placed inside the domain."""


class MeshFileError(NLSFVError, ValueError):
    """A mesh file could not be parsed or does not follow the schema."""


class SchemaVersionError(MeshFileError):
    pass


class MeshMismatchError(NLSFVError, ValueError):
    """A field does not live on the mesh it was paired with."""


class KrylovConvergenceError(NLSFVError):
    def __init__(self, message, residual, iterations):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class PicardConvergenceError(NLSFVError):
    def __init__(self, message, history):
        super().__init__(message)
        self.history = list(history)


class StepError(NLSFVError):
    """Wraps a solver failure with the index of the time step that failed."""

    def __init__(self, step, cause):
        super().__init__(f"time step {step} failed: {cause}")
        self.step = step
        self.cause = cause


class FitError(NLSFVError, ValueError):
    pass


class InsufficientDataError(FitError):
    pass


class NonpositiveMassError(FitError):
    pass
