"""Exception hierarchy.

Two families matter to callers: ``PreconditionError`` for bad inputs or
violated contracts (CLI exit code 2) and ``NumericalError`` for failures of
the numerics themselves (CLI exit code 3).
"""


class HullscopeError(Exception):
    pass


class PreconditionError(HullscopeError, ValueError):
    """Input outside an operation's stated domain."""


class DomainError(PreconditionError):
    """Point outside the annulus/disk of validity."""


class GeometryError(PreconditionError):
    """Domain, pole and the unit circle are not in the required position."""


class ParameterError(PreconditionError):
    """Numeric parameter outside its stated range."""


class ZeroPolynomialError(PreconditionError):
    """Operation undefined for the zero polynomial."""


class DegenerateError(PreconditionError):
    """Operation undefined for constant polynomials."""


class ExclusionError(PreconditionError):
    """Too few admissible degrees survive the exceptional-set filter."""


class NumericalError(HullscopeError, RuntimeError):
    pass


class ConditioningError(NumericalError):
    """A linear-algebra kernel or fit did not reach its residual target."""


class LPFailureError(NumericalError):
    """The LP solver failed for a reason other than unboundedness."""
