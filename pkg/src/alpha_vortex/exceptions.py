"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of a function."""


class InputError(ValueError):
    """Malformed or inconsistent user input (grids, configs, atom lists)."""


class QuadratureError(RuntimeError):
    """Numerical quadrature failed to reach the requested tolerance."""


class IntegrationBlowUp(RuntimeError):
    """Time integration produced a non-finite or runaway particle position.

    ``trajectory`` holds everything recorded before the failure, so callers
    can still write partial output.
    """

    def __init__(self, message, trajectory=None, state=None):
        super().__init__(message)
        self.trajectory = trajectory
        self.state = state
