"""Exception types shared across the package."""


class SegcoresetError(Exception):
    """Base class for errors raised by this package."""


class DimensionMismatchError(SegcoresetError, ValueError):
    """Inputs whose point dimensions do not agree."""


class InvalidParameterError(SegcoresetError, ValueError):
    """Parameter outside its documented range."""


class UnsupportedLipError(SegcoresetError, NotImplementedError):
    """Closed-form evaluation requested for a distance transform without one."""


class GridOverflowError(SegcoresetError, OverflowError):
    """Grid resolution formula exceeded the supported size."""


class QuadratureError(SegcoresetError, RuntimeError):
    """Adaptive quadrature failed to converge within the depth limit."""


class SamplingStallError(SegcoresetError, RuntimeError):
    """Rejection sampling made no progress (bad bounding box or membership)."""


class ParseError(SegcoresetError, ValueError):
    """Malformed input file; carries a 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
