"""Exception hierarchy.

Configuration problems and numerical failures are kept apart so the CLI can
map them to distinct exit codes.
"""


class FrontspeedError(Exception):
    pass


class ConfigError(FrontspeedError, ValueError):
    """Invalid parameters, descriptors or configuration files."""


class NumericalError(FrontspeedError, RuntimeError):
    """A computation ran but did not produce a trustworthy result."""


class EigenSolverError(NumericalError):
    def __init__(self, message, residual=float("nan"), iterations=0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class StabilityError(NumericalError):
    """Time step violates the explicit stability / CFL limits."""


class RangeGuardError(NumericalError):
    pass


class FrontNotFoundError(NumericalError):
    pass


class InstabilityPreconditionError(NumericalError):
    """The zero state is not linearly unstable, so no linear speed exists."""
