"""Exception types shared across the package.

Every failure mode that callers are expected to handle gets its own class so
that CLI exit codes and tests can dispatch on type rather than message text.
"""


class TsepError(Exception):
    """Base class for all package-specific errors."""


class NotHermitianError(TsepError):
    """Input matrix (or coefficient family) is not Hermitian within tolerance."""


class NotHermitianValuedError(TsepError):
    """Trigonometric polynomial does not satisfy c_{-l} = c_l* within tolerance."""


class NotPSDError(TsepError):
    """Matrix expected to be positive semidefinite is not."""


class NotPositiveError(TsepError):
    """Input fails a required positivity precondition."""


class NotStrictlyPositiveError(TsepError):
    """Input fails a required strict-positivity precondition."""


class NotOnCircleError(TsepError):
    """Complex parameter is not on the unit circle within tolerance."""


class NotUnitaryError(TsepError):
    """Matrix expected to be unitary is not, within tolerance."""


class NoConvergenceError(TsepError):
    """An iterative solver exhausted its budget before reaching its tolerance."""


class DimensionMismatchError(TsepError):
    """Operands have incompatible sizes."""


class GridExhaustedError(TsepError):
    """Sampling certification reached the grid cap without a verdict."""


class DecompositionFailedError(TsepError):
    """Atomic decomposition residual stayed above tolerance after all fallbacks.

    Flags a numerical degeneracy in the instance, not a failure of the
    underlying existence theory.
    """


class BudgetExhaustedError(TsepError):
    """Iteration/atom budget ran out; carries the best decomposition found."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class InconsistentAdjointsError(TsepError):
    """Basis values of a map violate the self-adjointness convention."""


class ZeroInputError(TsepError):
    """Input is numerically zero where a nonzero object is required."""


class BadParamsError(TsepError):
    """Parameters are out of the supported range."""


class ParseError(TsepError):
    """Input file is not valid JSON or does not match the expected schema."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class DegenerateAtomWarning(UserWarning):
    """An atom's block was numerically zero and has been dropped."""
