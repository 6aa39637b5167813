"""Exception hierarchy for ecomp.

Every error raised by the package derives from :class:`EcompError`, so callers
can catch one type at the boundary.  Subclasses mix in the closest builtin
category (ValueError/ArithmeticError) to stay friendly to generic handlers.
"""


class EcompError(Exception):
    """Base class for all ecomp errors."""


class DomainError(EcompError, ValueError):
    """Argument outside the mathematical domain of the operation."""


class ConfigError(EcompError, ValueError):
    """Malformed parameter set, spec file, or catalog id."""


class PreconditionError(EcompError, ValueError):
    """A stated precondition of the algorithm fails for the given input."""


class ConvergenceError(EcompError, ArithmeticError):
    """An iterative scheme failed to reach its tolerance."""


class DivergenceError(EcompError, ArithmeticError):
    """The defining series provably diverges for the given parameters."""


class ResourceError(EcompError, RuntimeError):
    """A hard cap (term count, iteration budget) was exhausted."""


class UnsupportedOrderError(EcompError, ValueError):
    """Derivative or moment order above what the implementation provides."""


class MismatchError(EcompError, ValueError):
    """Two objects that must describe the same model do not."""
