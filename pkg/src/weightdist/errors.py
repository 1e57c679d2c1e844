"""Exception hierarchy.

Three tiers, matching the CLI exit codes: bad input (exit 2), a
falsified claim about the code family (exit 1), and resource or
internal failures (exit 3).
"""


class WeightdistError(Exception):
    """Base class for all package errors."""


class ParameterError(WeightdistError, ValueError):
    """Invalid input parameters (CLI exit code 2)."""


class NonPrimeError(ParameterError):
    pass


class EvenCharacteristicError(ParameterError):
    pass


class FieldTooLargeError(ParameterError):
    pass


class NotADivisorError(ParameterError):
    pass


class NotInSubfieldError(ParameterError):
    pass


class InvalidSError(ParameterError):
    """m/gcd(m,k) is even or below 5."""


class InvalidTError(ParameterError):
    """t does not divide gcd(m,k), or the quotient is even."""


class DegenerateFactorError(ParameterError):
    """A parity-check factor has the wrong degree or coincides with another."""


class VerificationFailure(WeightdistError):
    """A claimed identity failed exact verification (CLI exit code 1)."""


class LemmaMismatchError(VerificationFailure):
    pass


class RankBoundViolationError(VerificationFailure):
    pass


class InadmissibleValueError(VerificationFailure):
    pass


class NonIntegralFrequencyError(VerificationFailure):
    pass


class NonIntegralWeightError(VerificationFailure):
    pass


class NonIntegralSolutionError(VerificationFailure):
    pass


class SingularSystemError(VerificationFailure):
    pass


class InternalError(WeightdistError):
    """Resource limits or broken internal invariants (CLI exit code 3)."""


class NotRationalError(InternalError):
    """A cyclotomic sum expected to be rational is not."""


class BudgetExceededError(InternalError):
    pass


class IntegerOverflowError(InternalError):
    pass
