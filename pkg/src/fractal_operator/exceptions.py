"""
Error types raised by the fractal operator library.

Input-shaped problems derive from ValueError, numerical or theoretical
failures from RuntimeError; everything derives from FractalError.
"""
from typing import Any, Optional


class FractalError(Exception):
    """Base class for every library error."""


class NonMonotoneKnots(FractalError, ValueError):
    """Partition knots are duplicated or decreasing."""


class TooFewKnots(FractalError, ValueError):
    """A partition needs at least three knots."""


class OutOfRange(FractalError, ValueError):
    """Abscissa outside the image interval of an affine map."""


class OutOfDomain(FractalError, ValueError):
    """Abscissa outside the domain of a grid function."""


class OrderTooHigh(FractalError, ValueError):
    """Finite-difference order beyond what the grid supports."""


class UnsupportedOrder(FractalError, ValueError):
    """Derivative order of a space beyond what the norms support."""


class IncompatibleScalingKind(FractalError, ValueError):
    """Scaling kind not admitted by the space (sampled scaling in Sobolev or Hoelder)."""


class SpecInvalid(FractalError, ValueError):
    """Problem specification fails a blocking check."""

    def __init__(self, message: str, report: Optional[Any] = None):
        super().__init__(message)
        self.report = report


class ExpressionError(FractalError, ValueError):
    """Expression text outside the supported grammar."""


class ProblemFileError(FractalError, ValueError):
    """Problem file cannot be read or does not follow the schema."""


class NotContractive(FractalError, RuntimeError):
    """Contraction factor of the chosen space is not below one."""

    def __init__(self, message: str, report: Optional[Any] = None):
        super().__init__(message)
        self.report = report


class HypothesisViolated(FractalError, RuntimeError):
    """A hypothesis needed by the operation does not hold."""


class MaxIterExceeded(FractalError, RuntimeError):
    """Fixed-point iteration did not reach the tolerance."""


class MaxTermsExceeded(FractalError, RuntimeError):
    """Neumann series did not reach the tolerance."""
