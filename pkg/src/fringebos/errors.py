"""Exception hierarchy shared by all fringebos modules."""


class FringebosError(Exception):
    """Base class for all toolkit errors."""


class DataError(FringebosError):
    """Malformed or inconsistent input data (CLI exit code 3)."""


class NumericalError(FringebosError):
    """Numerical failure during processing (CLI exit code 4)."""


# --- raster I/O ---

class BadMagic(DataError):
    pass


class TruncatedPayload(DataError):
    pass


class UnsupportedDtype(DataError):
    pass


class IoFailure(DataError):
    pass


class DegenerateRange(DataError):
    pass


# --- simulation ---

class EmptySpec(DataError):
    pass


class InvariantViolation(DataError):
    pass


class ConstantField(DataError):
    pass


class BadSpeckleSize(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class BadTimes(DataError):
    pass


# --- normalization / model weights ---

class NoCarrier(DataError):
    pass


class ShapeMismatch(DataError):
    pass


class HashMismatch(DataError):
    pass


class SizeMismatch(DataError):
    pass


class BadArch(DataError):
    pass


# --- demodulation ---

class RankDeficient(NumericalError):
    pass


class NonFinite(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class NoPeak(NumericalError):
    pass


# --- unwrapping / metrics / fitting ---

class DegenerateSize(DataError):
    pass


class DegenerateWindow(NumericalError):
    pass


class BadArguments(DataError):
    pass
