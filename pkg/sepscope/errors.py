"""Exception hierarchy.

Every error carries the process exit code the CLI reports for it:
2 for bad input, 3 for numerical failures and 1 for a violated bound chain.
"""


class SepscopeError(Exception):
    exit_code = 2


# --- Usage / input-domain errors (exit 2) ---

class UsageError(SepscopeError, ValueError):
    exit_code = 2


class InvalidShape(UsageError):
    pass


class DimensionMismatch(UsageError):
    pass


class EmptySubset(UsageError):
    pass


class SiteOutOfRange(UsageError):
    pass


class LevelOutOfRange(UsageError):
    pass


class InvalidRange(UsageError):
    pass


class OverlapError(UsageError):
    pass


class FullSetError(UsageError):
    pass


class TrivialPartition(UsageError):
    pass


class NotAGroup(UsageError):
    pass


class SymmetryViolation(UsageError):
    pass


class InvalidWeights(UsageError):
    pass


class SizeTooSmall(UsageError):
    pass


class ParseError(UsageError):
    pass


class MixedStateError(UsageError):
    pass


class IoError(UsageError):
    pass


# --- Numerical failures (exit 3) ---

class NumericalError(SepscopeError, ArithmeticError):
    exit_code = 3


class NotHermitian(NumericalError):
    pass


class NotPSD(NumericalError):
    pass


class TraceNotOne(NumericalError):
    pass


class NotNormalized(NumericalError):
    pass


class ConvergenceFailure(NumericalError):
    pass


class CalibrationInconsistent(NumericalError):
    pass


# --- Bound-chain violation (exit 1) ---

class ChainViolation(SepscopeError):
    """A computed lower bound exceeded its sampled upper estimate."""

    exit_code = 1

    def __init__(self, delta, margin: float, message: str = ""):
        self.delta = delta
        self.margin = margin
        super().__init__(message or f"bound chain violated at delta={list(delta)} (margin {margin:.3e})")
