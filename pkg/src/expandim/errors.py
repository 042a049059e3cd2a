"""Exception hierarchy shared across the toolkit."""


class ExpandimError(Exception):
    """Base class for all toolkit errors."""


class FieldMismatch(ExpandimError):
    """Operands live over different scalar fields."""


class DimensionMismatch(ExpandimError):
    """Matrix/vector shapes are incompatible."""


class DivisionByZero(ExpandimError, ZeroDivisionError):
    """Division by the zero scalar."""


class NotPrime(ExpandimError):
    """A prime modulus was required."""


class ZeroOrConstantPolynomial(ExpandimError):
    """Irreducibility is only defined for degree >= 1."""


class DegreeTooSmall(ExpandimError):
    """Construction needs a larger polynomial degree."""


class DimensionTooSmall(ExpandimError):
    """Construction needs a larger ambient dimension."""


class InvalidPermutation(ExpandimError):
    """A generator image is not a bijection of the point set."""


class ModularDegeneracy(ExpandimError):
    """Field characteristic divides the point count, so the mean-zero
    model contains an invariant vector and is rejected."""


class BudgetExceeded(ExpandimError):
    """Estimated enumeration size is over the configured budget."""


class InfiniteField(ExpandimError):
    """Exhaustive enumeration requested over the rationals."""


class NotIrreducible(ExpandimError):
    """Spectral certification requires an irreducible family."""


class TrivialRepresentation(ExpandimError):
    """Every vector is fixed; no spectral gap exists."""


class RankMismatch(ExpandimError):
    """Projection pair ranks disagree."""


class NumericalFailure(ExpandimError):
    """Floating-point routine failed a sanity bound."""


class StrategyUnavailable(ExpandimError):
    """The requested certification strategy cannot run on this family."""


class ConsistencyError(ExpandimError):
    """A certified lower bound exceeded an observed upper bound."""


class InternalError(ExpandimError):
    """Resampling or another bounded retry loop hit its cap."""
