"""Exception hierarchy shared by the library and the command line."""


class DomainError(ValueError):
    """Well-formed input outside the mathematical domain of an operation."""


class SmallVolumeError(DomainError):
    """No triangulation with K tetrahedra can have negative action."""


class BudgetError(RuntimeError):
    """A request exceeds a configured resource cap."""
