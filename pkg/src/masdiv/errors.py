class ValidationError(ValueError):
    """Input violates a documented precondition."""


class RegimeError(ValidationError):
    """A solver was asked for a vibration regime it does not cover."""


class IntegrationError(RuntimeError):
    """Numerical integration produced a non-finite state."""

    def __init__(self, t: float):
        super().__init__(f"non-finite state at t={t!r}")
        self.t = t
