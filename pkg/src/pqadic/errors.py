"""Exception types shared by every module.

Each class carries a stable ``code`` string. The CLI prints the code and
maps any :class:`DomainError` to exit status 2.
"""


class DomainError(ValueError):
    code = "DOMAIN_ERROR"


class NotPrimeError(DomainError):
    code = "NOT_PRIME"


class DigitRangeError(DomainError):
    code = "DIGIT_OUT_OF_RANGE"


class DenominatorDivisibleByP(DomainError):
    code = "DENOMINATOR_DIVISIBLE_BY_P"


class WrongPrimeError(DomainError):
    code = "WRONG_PRIME"


class PrimeMismatchError(DomainError):
    code = "PRIME_MISMATCH"


class RatioOneError(DomainError):
    code = "RATIO_ONE"


class RefusedError(DomainError):
    """Tail data needed to decide convergence was declared UNKNOWN."""

    code = "REFUSED"


class ZeroAlphaError(DomainError):
    code = "ZERO_ALPHA"


class EqualPrimesError(DomainError):
    code = "EQUAL_PRIMES"


class PlaceSetMismatchError(DomainError):
    code = "PLACE_SET_MISMATCH"


class EmptyInputError(DomainError):
    code = "EMPTY_INPUT"


class BranchNotIntegerError(DomainError):
    code = "BRANCH_NOT_INTEGER"


class BadConstantError(DomainError):
    code = "BAD_CONSTANT"


class BadAlphaError(DomainError):
    code = "BAD_ALPHA"


class ParseError(ValueError):
    """Malformed textual input. ``position`` is a 0-based column when known."""

    code = "PARSE_ERROR"

    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position
