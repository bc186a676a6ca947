"""Exception hierarchy shared by all resmon modules."""


class ResmonError(Exception):
    """Base class for resmon errors."""


class DomainError(ResmonError, ValueError):
    """Input outside the mathematical domain of an operation."""


class NumericalFailure(ResmonError, RuntimeError):
    """Solver or eigensolver did not produce a certified answer."""


class IllPosedError(ResmonError, ValueError):
    """A ratio or bound is not well defined for the given input."""


class SizeError(ResmonError, ValueError):
    """Problem exceeds a documented size guard."""


class ConfigurationError(ResmonError, ValueError):
    """Free sets supplied to an operation are inconsistent with it."""
