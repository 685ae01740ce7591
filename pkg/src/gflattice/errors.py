class ValidationError(ValueError):
    """Raised when a spec, config or argument violates its contract."""


class IntegrationError(RuntimeError):
    """Raised when an integrator loses norm/trace or otherwise fails."""
