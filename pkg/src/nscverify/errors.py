class NscError(Exception):
    """Base class for domain errors raised by this package."""

    kind = "NscError"

    def to_dict(self):
        return {"error": self.kind, "message": str(self)}


class DimensionError(NscError, ValueError):
    kind = "DimensionError"


class RankDeficient(NscError, ValueError):
    kind = "RankDeficient"


class ArgumentError(NscError, ValueError):
    kind = "ArgumentError"


class CapacityError(NscError):
    """Raised when an enumeration or LP would exceed the materialization limit."""

    kind = "CapacityError"


class NumericalBreakdown(NscError, ArithmeticError):
    """Raised when simplex pivoting exceeds its iteration cap."""

    kind = "NumericalBreakdown"
