"""Exception types shared across the toolkit."""


class LoadcastError(Exception):
    """Base class for all errors raised by this package."""


# --- data ingestion ---

class MalformedRow(LoadcastError):
    pass


class MissingTimestamp(LoadcastError):
    pass


class NonPositiveLoad(LoadcastError):
    pass


class DegenerateRange(LoadcastError):
    pass


class SeriesTooShort(LoadcastError):
    pass


class EmptySplit(LoadcastError):
    pass


# --- model fitting / prediction ---

class EmptyInput(LoadcastError):
    pass


class DimensionMismatch(LoadcastError):
    pass


class LengthMismatch(LoadcastError):
    pass


class NonFiniteInput(LoadcastError):
    pass


class InvalidHyperparameter(LoadcastError):
    pass


class EmptyGrid(LoadcastError):
    pass


class InsufficientHistory(LoadcastError):
    pass


class NonPositiveDefiniteKernel(LoadcastError):
    pass


class NoConvergence(LoadcastError):
    pass


class SingularSystem(LoadcastError):
    pass


class NonFiniteLoss(LoadcastError):
    pass


# --- evaluation ---

class ShapeMismatch(LoadcastError):
    pass


class ZeroTruth(LoadcastError):
    pass


class EmptyCurve(LoadcastError):
    pass


class FactoryFailure(LoadcastError):
    def __init__(self, resample_index, cause):
        super().__init__(f"model factory failed on resample {resample_index}: {cause!r}")
        self.resample_index = resample_index
        self.cause = cause


# --- persistence / configuration ---

class VersionMismatch(LoadcastError):
    pass


class CorruptFile(LoadcastError):
    pass


class MissingConfigKey(LoadcastError):
    pass
