"""
Exception hierarchy shared by every module.

Each error carries a kebab-case ``code`` that the CLI copies into its
machine-readable error object, and an ``exit_code`` for the process.
"""


class LabError(Exception):
    """Base class for all errors raised by the laboratory."""

    code: str = "lab-error"
    exit_code: int = 1

    def to_dict(self) -> dict:
        return {"code": self.code, "message": str(self)}


class InvalidInputError(LabError, ValueError):
    """Inputs violate a precondition or a type invariant."""

    code = "invalid-inputs"
    exit_code = 2


class NumericalError(LabError, ArithmeticError):
    """A computation on valid inputs could not produce a trustworthy result."""

    code = "numerical-failure"
    exit_code = 3


class InvalidBoundsError(InvalidInputError):
    code = "invalid-bounds"


class TooFewPointsError(InvalidInputError):
    code = "too-few-points"


class InvalidParamsError(InvalidInputError):
    code = "invalid-params"


class NonFiniteSampleError(InvalidInputError):
    code = "non-finite-sample"


class GridMismatchError(InvalidInputError):
    code = "grid-mismatch"


class MarginExceedsGridError(InvalidInputError):
    code = "margin-exceeds-grid"


class ZeroRateError(InvalidInputError):
    code = "zero-rate"


class DegeneratePotentialError(InvalidInputError):
    code = "degenerate-potential"


class NontrivialVacuumRequiredError(InvalidInputError):
    code = "nontrivial-vacuum-required"


class StrikeOutsideGridError(InvalidInputError):
    code = "strike-outside-grid"


class InconsistentRecordError(InvalidInputError):
    """A result record violates one of its own invariants."""

    code = "inconsistent-record"


class InvalidConfigError(InvalidInputError):
    code = "invalid-config"


class ReportIOError(InvalidInputError):
    code = "io-error"


class NoSignChangeError(NumericalError):
    code = "no-sign-change"


class MaxIterationsError(NumericalError):
    code = "max-iterations"


class NonFiniteError(NumericalError):
    code = "non-finite"


class SingularStepMatrixError(NumericalError):
    code = "singular-step-matrix"


class NonFiniteValuesError(NumericalError):
    code = "non-finite-values"
