"""Exception hierarchy shared by all modules."""
from __future__ import annotations


class RiemCompatError(Exception):
    """Base class for library errors."""


class ExpressionSyntaxError(RiemCompatError, ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifier(RiemCompatError, ValueError):
    def __init__(self, name: str):
        super().__init__(f"unknown identifier {name!r}")
        self.name = name


class DomainError(RiemCompatError, ArithmeticError):
    """Numerical domain violation (log/sqrt of non-positive, division by zero)."""

    def __init__(self, message: str, expr=None):
        super().__init__(message)
        self.expr = expr


class JetBudgetExceeded(RiemCompatError):
    pass


class VarianceMismatch(RiemCompatError, ValueError):
    pass


class ShapeMismatch(RiemCompatError, ValueError):
    pass


class SingularMetric(RiemCompatError, ArithmeticError):
    pass


class DimensionTooSmall(RiemCompatError, ValueError):
    pass


class NotRiemannian(RiemCompatError, ValueError):
    pass


class NotLorentzian(RiemCompatError, ValueError):
    pass


class NotUnitTimelike(RiemCompatError, ValueError):
    pass


class DegenerateFrame(RiemCompatError, ValueError):
    pass


class AsymmetricDeformation(RiemCompatError, ValueError):
    pass


class MissingField(RiemCompatError, KeyError):
    pass


class UnknownCatalogEntry(RiemCompatError, KeyError):
    pass


class InputError(RiemCompatError, ValueError):
    """Malformed metric/field file or CLI argument."""


class DimensionNot4(RiemCompatError, ValueError):
    """The electric/magnetic split is defined in four dimensions only."""
