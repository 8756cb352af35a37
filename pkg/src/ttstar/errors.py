"""Exception hierarchy shared by every module of the toolkit."""


class TtstarError(Exception):
    """Base class for all errors raised by ttstar."""


class DimensionMismatch(TtstarError, ValueError):
    pass


class NotHermitian(TtstarError, ValueError):
    pass


class NotPositiveDefinite(TtstarError, ValueError):
    pass


class InvalidRealStructure(TtstarError, ValueError):
    pass


class MissingRealStructure(TtstarError, ValueError):
    pass


class Singular(TtstarError, ArithmeticError):
    pass


class IndexOutOfRange(TtstarError, IndexError):
    pass


class ParseError(TtstarError, ValueError):
    pass


class SchemaError(TtstarError, ValueError):
    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class InvariantViolation(TtstarError, ValueError):
    def __init__(self, field, message=""):
        super().__init__(f"{field}: {message}" if message else field)
        self.field = field


class CommonEigenvalue(TtstarError, ArithmeticError):
    def __init__(self, message, gap=0.0):
        super().__init__(message)
        self.gap = gap


class NonRealSpectrum(TtstarError, ValueError):
    pass


class ISViolated(TtstarError, ArithmeticError):
    def __init__(self, report):
        super().__init__(f"IS condition violated (margin {report.margin:.3g})")
        self.report = report


class NotFlat(TtstarError, ValueError):
    pass


class NonConstant(TtstarError, ValueError):
    pass


class PairingViolated(TtstarError, ValueError):
    pass


class PreconditionViolated(TtstarError, ValueError):
    pass


class MissingWeight(TtstarError, ValueError):
    pass


class NotDecomposable(TtstarError, ValueError):
    pass


class StepCountTooSmall(TtstarError, ValueError):
    pass


class NondegeneracyFailure(TtstarError, ValueError):
    pass


class EigenvalueOnWall(TtstarError, ArithmeticError):
    def __init__(self, message, eigenvalue=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class UnknownFixture(TtstarError, KeyError):
    pass


class PositivityWarning(UserWarning):
    """The Hermitian form built from a Hodge grading is not positive definite."""
