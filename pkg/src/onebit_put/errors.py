"""Exception types shared across the package."""


class MechanismError(ValueError):
    """A matrix is not a valid (row-stochastic) privacy mechanism."""


class DomainError(ValueError):
    """A closed-form expression was evaluated outside its domain."""


class DesignError(ValueError):
    """A hypergraph does not have the symmetry an operation needs."""


class ResourceError(RuntimeError):
    """A construction would exceed the configured size cap."""


class DegenerateMechanismError(ValueError):
    """The estimator is undefined because the calibration slope is zero."""


class ConstructionError(RuntimeError):
    """A built object failed one of its own invariants."""
