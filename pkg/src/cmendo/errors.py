"""Exception types shared across the package."""


class CmendoError(Exception):
    """Base class for all package-specific errors."""


class NotPrimePower(CmendoError):
    pass


class ReduciblePolynomial(CmendoError):
    pass


class NotWeil(CmendoError):
    pass


class NotOrdinary(CmendoError):
    pass


class FactorizationFailure(CmendoError):
    pass


class NotSubring(CmendoError):
    pass


class NotRMOrder(CmendoError):
    pass


class UndesirablePrime(CmendoError):
    pass


class OwnerMismatch(CmendoError):
    pass


class NotInvertible(CmendoError):
    pass


class FactorBaseTooSmall(CmendoError):
    pass


class DecompositionTimeout(CmendoError):
    pass


class NoRelationFound(CmendoError):
    """Raised when the relation search exhausts its trial budget.

    Carries a diagnostics dict so callers can decide whether to retry
    with a larger smoothness bound or a different mu.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class NotNested(CmendoError):
    pass


class NotDivisor(CmendoError):
    pass


class InadmissiblePrime(CmendoError):
    pass


class NotVolcanoPrime(CmendoError):
    pass


class OracleInconsistency(CmendoError):
    pass


class RequirementsViolated(CmendoError):
    pass


class ParseError(CmendoError):
    """Structured-text parse failure with location information."""

    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.column = column
