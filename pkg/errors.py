"""
Exception types shared by the library and the command line.

Every error carries the process exit code the CLI reports for it:
0 success, 2 input error, 3 loop touching a degeneracy, 4 numerical failure.
"""

from typing import Optional, Tuple


class SwallowtailError(Exception):
    exit_code: int = 1


# =========================
# Input errors (exit 2)
# =========================
class ParameterError(SwallowtailError, ValueError):
    """Invalid model parameters, loop specification or numeric input."""
    exit_code = 2


class ArgumentError(SwallowtailError, ValueError):
    """Empty range, bad resolution or an unknown mode/gauge name."""
    exit_code = 2


class MalformedMatrixError(SwallowtailError, ValueError):
    exit_code = 2


class SymmetryViolationError(SwallowtailError, ValueError):
    """Matrix is not particle-hole symmetric, so its coefficients are not real."""
    exit_code = 2


class InputMismatchError(SwallowtailError, ValueError):
    """A (q, r, s) point and a matrix that do not belong together."""
    exit_code = 2


class LocusPreconditionError(SwallowtailError, ValueError):
    exit_code = 2


class GaugeUnavailableError(SwallowtailError, ValueError):
    exit_code = 2


# =========================
# Degenerate loops (exit 3)
# =========================
class LoopTouchesDegeneracyError(SwallowtailError):
    exit_code = 3

    def __init__(self, message: str, min_gap: float, phi: Optional[float] = None):
        super().__init__(message)
        self.min_gap = min_gap
        self.phi = phi


# =========================
# Numerical failures (exit 4)
# =========================
class NumericalFailureError(SwallowtailError, ArithmeticError):
    exit_code = 4


class NoInverseFoundError(NumericalFailureError):
    pass


class SingularMapError(NumericalFailureError):
    """Newton converged, but onto a point where the forward map is not invertible."""

    def __init__(self, message: str, point: Tuple[float, float, float], jacobian_det: float):
        super().__init__(message)
        self.point = point
        self.jacobian_det = jacobian_det


class AmbiguousMatchingError(NumericalFailureError):
    pass


class BraidResolutionError(NumericalFailureError):
    pass
