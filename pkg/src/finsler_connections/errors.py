"""Exception types raised by the engine."""


class FinslerError(Exception):
    """Base class for all engine errors."""


class UnsupportedOrderError(FinslerError, ValueError):
    pass


class NonFiniteInputError(FinslerError, ArithmeticError):
    pass


class DomainError(FinslerError, ValueError):
    """Point outside the slit tangent bundle or outside a metric's domain."""


class RegularityError(FinslerError, ArithmeticError):
    """The fundamental tensor is not positive definite."""


class DegeneracyError(FinslerError, ArithmeticError):
    """A linear system that must be nonsingular is (numerically) singular."""


class InternalInconsistencyError(FinslerError, RuntimeError):
    """A built-in structural assertion failed; indicates a bug, not bad input."""


class InsufficientSamplesError(FinslerError, ValueError):
    pass


class ConfigError(FinslerError, ValueError):
    pass


class EmptyDomainError(FinslerError, ValueError):
    """Every requested sample point was rejected."""
