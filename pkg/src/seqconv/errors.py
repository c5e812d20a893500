"""Exception types shared across the package."""


class SeqConvError(Exception):
    """Base class for all library errors."""


class ZeroPolynomial(SeqConvError, ValueError):
    pass


class IrreducibleDenominator(SeqConvError, ValueError):
    """A denominator has a root outside the rationals."""


class PoleAtIndex(SeqConvError, ZeroDivisionError):
    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"coefficient has a pole at n = {index}")


class UndefinedTerm(SeqConvError, ValueError):
    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"term {index} is undefined")


class InvalidAtom(SeqConvError, ValueError):
    pass


class IrregularInput(SeqConvError, ValueError):
    pass


class SingularLeading(SeqConvError, ValueError):
    pass


class OrderTooSmall(SeqConvError, ValueError):
    pass


class NotRationallyDAlembertian(SeqConvError, ValueError):
    """An operand that must be (quasi-)rationally d'Alembertian is not recognised as such."""


class NotDAlembertian(SeqConvError, ValueError):
    pass


class ExprSyntaxError(SeqConvError, SyntaxError):
    def __init__(self, message, position, expected=()):
        self.position = position
        self.expected = tuple(sorted(set(expected)))
        detail = f"{message} at position {position}"
        if self.expected:
            detail += f" (expected one of: {', '.join(self.expected)})"
        super().__init__(detail)
