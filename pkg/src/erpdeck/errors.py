"""Exception hierarchy.

Every error carries a ``category`` used by the command line to pick an exit
code: ``validation`` (2), ``numeric`` (3) or ``io`` (4).
"""


class ErpDeckError(Exception):
    category = "validation"


class InvalidInput(ErpDeckError, ValueError):
    pass


class ValidationError(ErpDeckError, ValueError):
    """Schema violation; ``field`` holds the offending dotted path."""

    def __init__(self, message, field=None):
        self.field = field
        if field:
            message = f"{field}: {message}"
        super().__init__(message)


class NotPositiveDefinite(ErpDeckError, ValueError):
    category = "numeric"


class NumericalError(ErpDeckError, ArithmeticError):
    category = "numeric"


class InvalidBand(InvalidInput):
    pass


class SignalTooShort(InvalidInput):
    pass


class EpochOutOfBounds(InvalidInput):
    pass


class InvalidFactor(InvalidInput):
    pass


class InvalidWindow(InvalidInput):
    pass


class ConstraintUnsatisfiable(InvalidInput):
    pass


class InvalidProtocol(InvalidInput):
    pass


class ShapeError(InvalidInput):
    pass


class UnknownArchitecture(InvalidInput):
    pass


class UnknownPipeline(InvalidInput):
    pass


class DegenerateLabels(InvalidInput):
    pass


class EmptyModel(ErpDeckError, RuntimeError):
    """Stepwise selection admitted no feature."""

    category = "numeric"


class UndefinedMetric(ErpDeckError, ValueError):
    category = "numeric"


class IncompleteBlock(InvalidInput):
    pass


class NotFitted(ErpDeckError, RuntimeError):
    pass


class CorruptModel(ErpDeckError, IOError):
    category = "io"


class IoError(ErpDeckError, IOError):
    category = "io"


EXIT_CODES = {"validation": 2, "numeric": 3, "io": 4}
