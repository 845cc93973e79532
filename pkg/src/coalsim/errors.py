"""Exception types shared across the package."""


class CoalsimError(Exception):
    pass


class BudgetError(CoalsimError):
    """A resource budget (triangle count, enumeration size) would be exceeded."""


class DomainError(CoalsimError, ValueError):
    """A geometric input lies outside the gasket / window."""


class ParameterError(CoalsimError, ValueError):
    """A numeric parameter is outside its admissible range."""


class ContractError(CoalsimError, ValueError):
    """Inputs violate an interface contract (mismatched grids, empty sets, ...)."""


class PreconditionError(CoalsimError, ValueError):
    """A stated precondition of an exact check does not hold."""
