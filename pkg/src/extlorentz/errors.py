"""Exception types shared across the package."""


class SingularityError(ValueError):
    """A field model was evaluated at one of its singular points."""


class ConfigError(ValueError):
    """Invalid run configuration (CLI exit code 1)."""


class IntegrationAbort(RuntimeError):
    """Geodesic integration stopped before reaching ``tau_end``.

    ``last_state`` holds the last state that passed the monitor, as an
    8-vector ``(x0, x1, x2, x3, u0, u1, u2, u3)``, and ``tau`` its proper
    time.
    """

    def __init__(self, message, tau=None, last_state=None):
        super().__init__(message)
        self.tau = tau
        self.last_state = last_state
