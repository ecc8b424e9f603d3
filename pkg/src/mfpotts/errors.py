"""Exception types shared across the package."""


class MfpottsError(Exception):
    """Base class for package errors."""


class MatrixFormatError(MfpottsError, ValueError):
    """A coupling-matrix or graphon file could not be parsed or validated."""


class EnumerationCapError(MfpottsError, ValueError):
    """Brute-force enumeration would exceed the configured cap."""


class ConvergenceError(MfpottsError, RuntimeError):
    """An iterative solver hit its iteration cap."""
