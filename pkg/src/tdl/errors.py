"""Exception hierarchy shared by every module.

``DomainError`` subclasses map to CLI exit code 1, ``TooLarge`` to exit code 2.
"""


class DomainError(ValueError):
    code = "DOMAIN"


class ZeroInverse(DomainError, ZeroDivisionError):
    code = "ZERO_INVERSE"


class ZeroPolynomial(DomainError):
    code = "ZERO_POLYNOMIAL"


class ModulusMismatch(DomainError):
    code = "MODULUS_MISMATCH"


class NotPrime(DomainError):
    code = "NOT_PRIME"


class NotAGroup(DomainError):
    code = "NOT_A_GROUP"


class UnsupportedKind(DomainError):
    code = "UNSUPPORTED_KIND"


class BadReduction(DomainError):
    code = "BAD_REDUCTION"


class PrimeClash(DomainError):
    code = "PRIME_CLASH"


class UnknownPrime(DomainError):
    code = "UNKNOWN_PRIME"


class EmptyRange(DomainError):
    code = "EMPTY_RANGE"


class FormatError(DomainError):
    code = "FORMAT"


class TooLarge(RuntimeError):
    """An exact enumeration would exceed the configured candidate budget."""

    code = "BUDGET"

    def __init__(self, needed, budget, what="search space"):
        self.needed = needed
        self.budget = budget
        super().__init__(f"{what} of {needed} candidates exceeds budget {budget}")
