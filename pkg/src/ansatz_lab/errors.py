"""Exception hierarchy shared by every module."""


class AnsatzLabError(Exception):
    """Base class for all library errors."""


class ValidationError(AnsatzLabError, ValueError):
    """Input failed a precondition check."""


class IndexOutOfRange(ValidationError):
    pass


class MissingAngle(ValidationError):
    pass


class ArityMismatch(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class DimensionTooLarge(ValidationError):
    pass


class NotUnitary(ValidationError):
    pass


class InvalidSpec(ValidationError):
    pass


class UnsupportedGate(ValidationError):
    pass


class UnsupportedFamily(ValidationError):
    pass


class NotAlternatingRxCx(ValidationError):
    pass


class EmptyMatrix(ValidationError):
    pass


class NotInvertible(ValidationError):
    pass


class CapExceeded(AnsatzLabError):
    def __init__(self, cap: int):
        super().__init__(f"order exceeds cap={cap}")
        self.cap = cap


class InvalidColumn(ValidationError):
    pass


class EmptyGraph(ValidationError):
    pass


class PenaltyTooSmall(ValidationError):
    pass


class TooManyQubits(ValidationError):
    pass


class InconsistentArity(ValidationError):
    pass


class ParseError(AnsatzLabError, ValueError):
    """Malformed input file. Carries the offending line or field when known."""

    def __init__(self, message: str, *, line: int | None = None, field: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.line = line
        self.field = field
