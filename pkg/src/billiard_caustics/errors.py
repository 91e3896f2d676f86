"""Exception types shared by the numeric modules and the CLI."""


class DomainError(ValueError):
    """An argument lies outside the domain where the computation is defined."""


class ConvergenceError(RuntimeError):
    """An iterative solver failed to reach its tolerance."""
